"""
Context generation: motion compensation in the feature domain.

The reference frame is lifted to ``context_dim`` feature channels, warped by
the decoded motion and refined::

    context = refine(warp(extract(x_ref), m_hat))

In the pixel-domain condition modes (``rgb_prediction``, ``residue``) the
condition is the warped reference frame itself.
"""

from typing import Optional

import torch
import torch.nn as nn

from ctxcodec.config import CodecConfig, ConditionMode, MotionMode
from ctxcodec.exceptions import ArgumentError
from ctxcodec.layers.blocks import ResBlock
from ctxcodec.motion.warp import warp_bilinear


class FeatureExtractor(nn.Module):
    """One convolution and one residual block at full resolution."""

    def __init__(self, channels: int):
        super().__init__()
        self.conv = nn.Conv2d(3, channels, 3, padding=1)
        self.res = ResBlock(channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.res(self.conv(x))


class ContextRefiner(nn.Module):
    """One convolution followed by ``blocks`` residual blocks."""

    def __init__(self, channels: int, blocks: int = 1):
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)
        self.body = nn.Sequential(*(ResBlock(channels) for _ in range(blocks)))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(self.conv(x))


class ContextGenerator(nn.Module):
    """Feature extractor, warp and refiner for one codec configuration."""

    def __init__(self, config: CodecConfig):
        super().__init__()
        self.config = config
        self.extractor = FeatureExtractor(config.context_dim)
        self.refiner = ContextRefiner(config.context_dim, config.refine_blocks)

    def forward(self, ref: torch.Tensor, mv: Optional[torch.Tensor]) -> torch.Tensor:
        if self.config.condition_mode is not ConditionMode.CONTEXT_FEATURE:
            return pixel_warp(ref, mv) if self.config.motion_mode is MotionMode.MEMC else ref
        features = self.extractor(ref)
        if self.config.motion_mode is MotionMode.MEMC:
            features = warp_bilinear(features, mv)
        return self.refiner(features)


def _batched(x: torch.Tensor, channels: Optional[int], name: str):
    squeeze = x.dim() == 3
    x = x.unsqueeze(0) if squeeze else x
    if x.dim() != 4 or (channels is not None and x.shape[1] != channels):
        raise ArgumentError(f"{name} has unexpected shape {tuple(x.shape)}")
    return x, squeeze


def pixel_warp(ref: torch.Tensor, mv: torch.Tensor) -> torch.Tensor:
    """Reference frame warped by the decoded motion (the pixel prediction ``x_tilde``)."""
    return warp_bilinear(ref, mv)


def extract_features(ref: torch.Tensor, generator: ContextGenerator) -> torch.Tensor:
    """
    Feature-domain reference ``[C_ctx, H, W]``.

    Accepts a ``[3, H, W]`` frame or a ``[N, 3, H, W]`` batch.
    """
    x, squeeze = _batched(ref, 3, "reference frame")
    features = generator.extractor(x)
    return features.squeeze(0) if squeeze else features


def generate_context(ref: torch.Tensor, mv: Optional[torch.Tensor], generator: ContextGenerator) -> torch.Tensor:
    """
    Condition tensor for the contextual codec.

    Args:
        ref: Previous decoded frame, ``[3, H, W]`` or batched
        mv: Decoded motion ``[2, H, W]`` or batched; ignored (and may be None)
            when the motion mode is ``none``
        generator: Context networks and configuration

    Returns:
        ``[C_ctx, H, W]`` context in the feature mode, ``[3, H, W]`` in the pixel modes

    Raises:
        ArgumentError: If the shapes of ``ref`` and ``mv`` are inconsistent
    """
    x, squeeze = _batched(ref, 3, "reference frame")
    flow = None
    if generator.config.motion_mode is MotionMode.MEMC:
        if mv is None:
            raise ArgumentError("motion-compensated context needs a motion field")
        flow, _ = _batched(mv, 2, "motion field")
        if flow.shape[0] != x.shape[0] or flow.shape[-2:] != x.shape[-2:]:
            raise ArgumentError(f"motion field {tuple(flow.shape)} does not match frame {tuple(x.shape)}")
    ctx = generator(x, flow)
    return ctx.squeeze(0) if squeeze else ctx
