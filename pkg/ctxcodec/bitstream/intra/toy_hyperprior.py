"""
Toy learned intra codec: a small hyperprior image autoencoder.

Analysis and synthesis transforms use GDN/IGDN; the latents are modelled by
the Laplace entropy model with the hyper prior only, and the hyper latents by
the factorized prior. Coding reuses the same substream format as P frames.
"""

import struct
from dataclasses import dataclass

import torch
import torch.nn as nn

from ctxcodec.bitstream.container import LENGTH
from ctxcodec.bitstream.intra.base import IntraCodec
from ctxcodec.bitstream.latent_coder import decode_hyper, decode_latents, encode_hyper, encode_latents
from ctxcodec.config import EntropyMode
from ctxcodec.entropy.model import EntropyModel
from ctxcodec.exceptions import CorruptionError
from ctxcodec.layers.blocks import conv, deconv
from ctxcodec.layers.gdn import GDN
from ctxcodec.layers.quantization import quantize
from ctxcodec.video.frames import check_frame, crop, pad_to_multiple, padded_size

SIZE = struct.Struct(">II")


@dataclass
class IntraOutput:
    x_hat: torch.Tensor
    bits: torch.Tensor


class ToyHyperpriorIntra(nn.Module, IntraCodec):
    """
    Hyperprior image codec (``toy-hyperprior``).

    Args:
        channels: Width of the transforms
        latent_channels: Channels of the /16 latents
        hyper_channels: Channels of the /64 hyper latents
    """

    codec_id = 1
    name = "toy-hyperprior"

    def __init__(self, channels: int = 64, latent_channels: int = 96, hyper_channels: int = 64):
        super().__init__()
        self.latent_channels = latent_channels
        self.hyper_channels = hyper_channels
        self.analysis = nn.Sequential(
            conv(3, channels),
            GDN(channels),
            conv(channels, channels),
            GDN(channels),
            conv(channels, channels),
            GDN(channels),
            conv(channels, latent_channels),
        )
        self.synthesis = nn.Sequential(
            deconv(latent_channels, channels),
            GDN(channels, inverse=True),
            deconv(channels, channels),
            GDN(channels, inverse=True),
            deconv(channels, channels),
            GDN(channels, inverse=True),
            deconv(channels, 3),
        )
        self.entropy = EntropyModel(latent_channels, hyper_channels, EntropyMode.HYPER_ONLY)

    @property
    def device(self) -> torch.device:
        return next(self.parameters()).device

    def forward(self, x: torch.Tensor) -> IntraOutput:
        coded = self.entropy(self.analysis(x), training=self.training)
        x_hat = self.synthesis(coded.y_hat).clamp(0.0, 1.0)
        return IntraOutput(x_hat=x_hat, bits=coded.bits_y + coded.bits_z)

    @torch.no_grad()
    def encode(self, frame: torch.Tensor) -> bytes:
        check_frame(frame)
        height, width = frame.shape[-2:]
        x = pad_to_multiple(frame.unsqueeze(0).to(self.device))
        y = self.analysis(x)
        y_hat = quantize(y, "round")
        z_hat = quantize(self.entropy.hyper_encode(y), "round")
        hyper = self.entropy.hyper_decode(z_hat)
        y_bytes = encode_latents(y_hat, hyper, None, self.entropy)
        z_bytes = encode_hyper(z_hat, self.entropy.factorized)
        return SIZE.pack(width, height) + LENGTH.pack(len(y_bytes)) + y_bytes + LENGTH.pack(len(z_bytes)) + z_bytes

    @torch.no_grad()
    def decode(self, payload: bytes) -> torch.Tensor:
        if len(payload) < SIZE.size:
            raise CorruptionError("intra payload shorter than its size header")
        width, height = SIZE.unpack_from(payload)
        pos = SIZE.size
        chunks = []
        for _ in range(2):
            if pos + LENGTH.size > len(payload):
                raise CorruptionError("truncated intra payload")
            (length,) = LENGTH.unpack_from(payload, pos)
            pos += LENGTH.size
            if pos + length > len(payload):
                raise CorruptionError("truncated intra payload")
            chunks.append(payload[pos : pos + length])
            pos += length
        y_bytes, z_bytes = chunks

        pad_h, pad_w = padded_size(height, width)
        z_hat = decode_hyper(z_bytes, (1, self.hyper_channels, pad_h // 64, pad_w // 64), self.entropy.factorized, self.device)
        hyper = self.entropy.hyper_decode(z_hat)
        y_hat = decode_latents(y_bytes, (1, self.latent_channels, pad_h // 16, pad_w // 16), hyper, None, self.entropy)
        x_hat = self.synthesis(y_hat).clamp(0.0, 1.0)
        return crop(x_hat[0], height, width)
