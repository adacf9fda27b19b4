"""
Synthetic clips with known motion.

Frames sample a smooth sum-of-sinusoids texture at shifted positions,
``frame_t(p) = texture(p + t * d)``, so backward warping frame ``t - 1`` by
the constant flow ``d`` reproduces frame ``t`` exactly.
"""

import math
from typing import Tuple

import torch

from ctxcodec.video.frames import FrameSequence

NUM_WAVES = 3
AMPLITUDE = 0.15


def smooth_texture(
    xs: torch.Tensor, ys: torch.Tensor, seed: int = 0, period: float = 32.0
) -> torch.Tensor:
    """RGB texture in [0.05, 0.95] evaluated at real coordinates, ``[3, *xs.shape]``."""
    gen = torch.Generator().manual_seed(seed)
    channels = []
    for _ in range(3):
        value = torch.full_like(xs, 0.5)
        for _ in range(NUM_WAVES):
            angle = float(torch.rand(1, generator=gen)) * 2 * math.pi
            scale = 1.0 + float(torch.rand(1, generator=gen))
            phase = float(torch.rand(1, generator=gen)) * 2 * math.pi
            fx = scale * math.cos(angle) * 2 * math.pi / period
            fy = scale * math.sin(angle) * 2 * math.pi / period
            value = value + AMPLITUDE * torch.sin(fx * xs + fy * ys + phase)
        channels.append(value)
    return torch.stack(channels)


def translating_clip(
    frames: int = 7,
    size: Tuple[int, int] = (64, 64),
    shift: Tuple[float, float] = (2.0, 0.0),
    seed: int = 0,
) -> FrameSequence:
    """
    Clip whose content moves by ``-shift`` pixels per frame (ground-truth backward flow ``shift``).

    Args:
        frames: Number of frames
        size: ``(height, width)``
        shift: ``(dx, dy)`` flow in pixels per frame
        seed: Texture seed
    """
    height, width = size
    ys, xs = torch.meshgrid(
        torch.arange(height, dtype=torch.float64),
        torch.arange(width, dtype=torch.float64),
        indexing="ij",
    )
    dx, dy = shift
    out = [
        smooth_texture(xs + t * dx, ys + t * dy, seed).clamp(0.0, 1.0).float() for t in range(frames)
    ]
    return FrameSequence(out)


def static_clip(frames: int = 7, size: Tuple[int, int] = (64, 64), seed: int = 0) -> FrameSequence:
    return translating_clip(frames, size, (0.0, 0.0), seed)
