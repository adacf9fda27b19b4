"""
P-frame encoding and decoding.

The encoder runs flow estimation, MV coding, context generation, contextual
encoding and entropy coding of the four substreams. Everything after the
flow estimate is recomputed from integer latents through the same calls the
decoder makes, so the encoder-side reconstruction is the decoder's
reconstruction bit for bit.
"""

import logging
from contextlib import contextmanager
from typing import Optional, Tuple

import numpy as np
import torch

from ctxcodec.bitstream.container import FrameBitstream, FrameType
from ctxcodec.bitstream.latent_coder import decode_hyper, decode_latents, encode_hyper, encode_latents
from ctxcodec.exceptions import ArgumentError, ConfigurationError, CorruptionError
from ctxcodec.layers.quantization import quantize
from ctxcodec.model import VideoModel
from ctxcodec.motion.mv_codec import MvLatentBlock, mv_decode, mv_encode
from ctxcodec.video.frames import PAD_MULTIPLE

logger = logging.getLogger(__name__)

G, S, Y, Z = range(4)


def _check_coding_config(model: VideoModel) -> None:
    if model.config.mean_shift:
        raise ConfigurationError("mean-shifted rounding is reserved and cannot be used for coding")


def _as_frame_batch(frame: torch.Tensor, name: str) -> torch.Tensor:
    if frame.dim() != 3 or frame.shape[0] != 3:
        raise ArgumentError(f"{name} must be [3, H, W], got {tuple(frame.shape)}")
    height, width = frame.shape[-2:]
    if height % PAD_MULTIPLE or width % PAD_MULTIPLE:
        raise ArgumentError(f"{name} {width}x{height} is not padded to a multiple of {PAD_MULTIPLE}")
    return frame.unsqueeze(0)


@contextmanager
def _substream(index: int):
    try:
        yield
    except CorruptionError as e:
        raise CorruptionError(e.message, substream=index) from e


def _temporal(model: VideoModel, condition: torch.Tensor) -> Optional[torch.Tensor]:
    if model.entropy.temporal is None:
        return None
    return model.entropy.temporal_prior(condition)


@torch.no_grad()
def encode_frame_p(
    x: torch.Tensor,
    ref: torch.Tensor,
    model: VideoModel,
    order: Optional[np.ndarray] = None,
) -> Tuple[FrameBitstream, torch.Tensor]:
    """
    Encode one P frame.

    Args:
        x: Current padded frame ``[3, H, W]``
        ref: Previous *decoded* frame ``[3, H, W]``
        model: P-frame networks and configuration
        order: Optional element order for the y substream (parallel modes only)

    Returns:
        ``(bitstream, reconstruction)``; the reconstruction is ``[3, H, W]``
    """
    _check_coding_config(model)
    model.eval()
    cur = _as_frame_batch(x, "current frame")
    prev = _as_frame_batch(ref, "reference frame")
    if cur.shape != prev.shape:
        raise ArgumentError(f"current {tuple(x.shape)} and reference {tuple(ref.shape)} differ")

    g_bytes = s_bytes = b""
    m_hat = None
    if model.uses_motion:
        mv_entropy = model.mv_codec.entropy
        block = mv_encode(model.flow_net(prev, cur), model.mv_codec)
        g_bytes = encode_latents(block.g_hat, mv_entropy.hyper_decode(block.s_hat), None, mv_entropy)
        s_bytes = encode_hyper(block.s_hat, mv_entropy.factorized)
        m_hat = mv_decode(block, model.mv_codec)

    condition = model.context(prev, m_hat)
    y = model.encoder(cur, condition)
    y_hat = quantize(y, "round")
    z_hat = quantize(model.entropy.hyper_encode(y), "round")
    hyper = model.entropy.hyper_decode(z_hat)
    y_bytes = encode_latents(y_hat, hyper, _temporal(model, condition), model.entropy, order)
    z_bytes = encode_hyper(z_hat, model.entropy.factorized)

    recon = model.decoder(y_hat, condition)[0]
    bits = FrameBitstream(FrameType.P, substreams=[g_bytes, s_bytes, y_bytes, z_bytes])
    logger.debug("P frame: %s bits", bits.substream_bits())
    return bits, recon


@torch.no_grad()
def decode_frame_p(
    bits: FrameBitstream,
    ref: torch.Tensor,
    model: VideoModel,
    order: Optional[np.ndarray] = None,
) -> torch.Tensor:
    """
    Decode one P frame against the previous decoded frame.

    A wrong reference is not detected; it silently gives a different frame.

    Raises:
        CorruptionError: With the index of the failing substream (0=g, 1=s, 2=y, 3=z)
    """
    _check_coding_config(model)
    if bits.frame_type is not FrameType.P:
        raise ArgumentError("decode_frame_p needs a P record")
    model.eval()
    prev = _as_frame_batch(ref, "reference frame")
    _, _, height, width = prev.shape
    g_bytes, s_bytes, y_bytes, z_bytes = bits.substreams

    m_hat = None
    if model.uses_motion:
        mv_entropy = model.mv_codec.entropy
        channels = model.config.mv_channels
        with _substream(S):
            s_hat = decode_hyper(s_bytes, (1, channels, height // 64, width // 64), mv_entropy.factorized)
        with _substream(G):
            g_hat = decode_latents(
                g_bytes, (1, channels, height // 16, width // 16), mv_entropy.hyper_decode(s_hat), None, mv_entropy
            )
        m_hat = mv_decode(MvLatentBlock(g_hat=g_hat, s_hat=s_hat), model.mv_codec)
    elif g_bytes or s_bytes:
        raise CorruptionError("MV substreams present in a frame coded without motion", substream=G if g_bytes else S)

    condition = model.context(prev, m_hat)
    config = model.config
    with _substream(Z):
        z_hat = decode_hyper(z_bytes, (1, config.hyper_channels, height // 64, width // 64), model.entropy.factorized)
    hyper = model.entropy.hyper_decode(z_hat)
    with _substream(Y):
        y_hat = decode_latents(
            y_bytes,
            (1, config.latent_channels, height // 16, width // 16),
            hyper,
            _temporal(model, condition),
            model.entropy,
            order,
        )
    return model.decoder(y_hat, condition)[0]
