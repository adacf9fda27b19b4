"""
Quantization of latents.

Rounding is to the nearest integer with ties away from zero, the same on every
platform. Its gradient is the identity (straight-through). The training-time
relaxation for rate terms adds uniform noise in [-0.5, 0.5).
"""

from enum import Enum

import torch

from ctxcodec.exceptions import ArgumentError


class QuantMode(str, Enum):
    ROUND = "round"
    NOISE = "noise"
    STE = "ste"  # alias of ROUND, named for readability at training call sites


def round_half_away(x: torch.Tensor) -> torch.Tensor:
    """Round to nearest, ties away from zero. No gradient."""
    return torch.sign(x) * torch.floor(torch.abs(x) + 0.5)


class _RoundStraightThrough(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x):
        return round_half_away(x)

    @staticmethod
    def backward(ctx, grad):
        return grad


def quantize(x: torch.Tensor, mode="round", generator: torch.Generator = None) -> torch.Tensor:
    """
    Quantize ``x``.

    Args:
        x: Real-valued tensor
        mode: ``round``/``ste`` (integer output, straight-through gradient) or
            ``noise`` (additive uniform noise, training only)
        generator: Optional RNG for the noise

    Returns:
        Tensor of the same shape and dtype
    """
    mode = QuantMode(mode) if not isinstance(mode, QuantMode) else mode
    if mode is QuantMode.NOISE:
        noise = torch.rand(x.shape, generator=generator, dtype=x.dtype, device=x.device) - 0.5
        return x + noise
    if mode in (QuantMode.ROUND, QuantMode.STE):
        return _RoundStraightThrough.apply(x)
    raise ArgumentError(f"unknown quantization mode: {mode}")


def is_integral(x: torch.Tensor) -> bool:
    """True if every element of ``x`` is an integer value."""
    return bool(torch.all(x == torch.round(x)))
