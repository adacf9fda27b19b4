"""
Motion-vector codec.

An analysis/synthesis pair with GDN maps the ``[2, H, W]`` motion field to
``C_g`` latents at /16 and back, followed by a small refinement stack. The MV
latents are entropy coded with the hyper and spatial priors (no temporal
prior), through the same :class:`~ctxcodec.entropy.model.EntropyModel` that
models the frame latents.
"""

from dataclasses import dataclass

import torch
import torch.nn as nn

from ctxcodec.config import EntropyMode
from ctxcodec.entropy.model import EntropyModel
from ctxcodec.exceptions import ArgumentError, ContractError
from ctxcodec.layers.blocks import ResBlock, conv, deconv, zero_module
from ctxcodec.layers.gdn import GDN
from ctxcodec.layers.quantization import is_integral, quantize

MV_PAD_MULTIPLE = 64


@dataclass
class MvLatentBlock:
    """Integer MV latents ``g_hat`` at /16 and their hyper latents ``s_hat`` at /64."""

    g_hat: torch.Tensor
    s_hat: torch.Tensor

    def __post_init__(self):
        if not (is_integral(self.g_hat) and is_integral(self.s_hat)):
            raise ContractError("MV latents must be integer valued")


@dataclass
class MvCodecOutput:
    """Training outputs: decoded flow and the rates of ``g`` and ``s`` in bits."""

    m_hat: torch.Tensor
    bits_g: torch.Tensor
    bits_s: torch.Tensor


class MvRefiner(nn.Module):
    """Residual refinement of the decoded flow; starts as the identity."""

    def __init__(self, channels: int = 32, blocks: int = 1):
        super().__init__()
        self.head = nn.Sequential(nn.Conv2d(2, channels, 3, padding=1), nn.LeakyReLU(0.1))
        self.body = nn.Sequential(*(ResBlock(channels) for _ in range(blocks)))
        self.tail = zero_module(nn.Conv2d(channels, 2, 3, padding=1))

    def forward(self, flow: torch.Tensor) -> torch.Tensor:
        return flow + self.tail(self.body(self.head(flow)))


class MvCodec(nn.Module):
    """
    Learned MV compression.

    Args:
        channels: Latent channels ``C_g`` (also used for the hyper latents)
        hidden_channels: Width of the analysis/synthesis transforms
    """

    def __init__(self, channels: int = 64, hidden_channels: int = 64):
        super().__init__()
        self.channels = channels
        self.encoder = nn.Sequential(
            conv(2, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, channels),
        )
        self.decoder = nn.Sequential(
            deconv(channels, hidden_channels),
            GDN(hidden_channels, inverse=True),
            deconv(hidden_channels, hidden_channels),
            GDN(hidden_channels, inverse=True),
            deconv(hidden_channels, hidden_channels),
            GDN(hidden_channels, inverse=True),
            deconv(hidden_channels, 2),
        )
        self.refiner = MvRefiner()
        self.entropy = EntropyModel(channels, channels, EntropyMode.HYPER_SPATIAL)

    @staticmethod
    def check_flow(m: torch.Tensor) -> None:
        if m.dim() != 4 or m.shape[1] != 2:
            raise ArgumentError(f"motion field must be [N, 2, H, W], got {tuple(m.shape)}")
        height, width = m.shape[-2:]
        if height % MV_PAD_MULTIPLE or width % MV_PAD_MULTIPLE:
            raise ArgumentError(f"motion field {width}x{height} is not a multiple of {MV_PAD_MULTIPLE}")

    def analysis(self, m: torch.Tensor) -> torch.Tensor:
        self.check_flow(m)
        return self.encoder(m)

    def synthesis(self, g_hat: torch.Tensor) -> torch.Tensor:
        return self.refiner(self.decoder(g_hat))

    def forward(self, m: torch.Tensor, training: bool = True) -> MvCodecOutput:
        g = self.analysis(m)
        coded = self.entropy(g, training=training)
        return MvCodecOutput(m_hat=self.synthesis(coded.y_hat), bits_g=coded.bits_y, bits_s=coded.bits_z)


def mv_encode(m: torch.Tensor, codec: MvCodec) -> MvLatentBlock:
    """
    Integer MV latents of a motion field.

    Args:
        m: ``[2, H, W]`` (or batched) motion field, H and W multiples of 64
        codec: MV codec weights

    Returns:
        Block with ``g_hat [C_g, H/16, W/16]`` and ``s_hat [C_g, H/64, W/64]``
    """
    squeeze = m.dim() == 3
    if squeeze:
        m = m.unsqueeze(0)
    g = codec.analysis(m)
    g_hat = quantize(g, "round")
    s_hat = quantize(codec.entropy.hyper_encode(g), "round")
    if squeeze:
        g_hat, s_hat = g_hat.squeeze(0), s_hat.squeeze(0)
    return MvLatentBlock(g_hat=g_hat, s_hat=s_hat)


def mv_decode(block: MvLatentBlock, codec: MvCodec) -> torch.Tensor:
    """Decoded (refined) motion field ``m_hat`` with the shape of the encoded field."""
    g_hat = block.g_hat
    squeeze = g_hat.dim() == 3
    if squeeze:
        g_hat = g_hat.unsqueeze(0)
    if g_hat.shape[1] != codec.channels:
        raise ArgumentError(f"expected {codec.channels} MV latent channels, got {g_hat.shape[1]}")
    m_hat = codec.synthesis(g_hat)
    return m_hat.squeeze(0) if squeeze else m_hat
