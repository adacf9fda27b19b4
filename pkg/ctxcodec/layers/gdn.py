"""
Generalized divisive normalization (GDN) and its inverse (IGDN).

    y_i = x_i / sqrt(beta_i + sum_j gamma_ij * x_j^2)        (GDN)
    y_i = x_i * sqrt(beta_i + sum_j gamma_ij * x_j^2)        (IGDN)

The functional form validates its parameters. The module form stores
reparameterized tensors so that training can never leave the admissible
region (beta >= beta_min, gamma >= 0).
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError, ParameterError

BETA_MIN = 1e-6


def gdn(
    x: torch.Tensor,
    beta: torch.Tensor,
    gamma: torch.Tensor,
    inverse: bool = False,
    beta_min: float = BETA_MIN,
    validate: bool = True,
) -> torch.Tensor:
    """
    Apply GDN (or IGDN) over the channel axis of ``x``.

    Args:
        x: ``[N, C, H, W]`` or ``[C, H, W]`` input
        beta: ``[C]`` positive offsets
        gamma: ``[C, C]`` nonnegative weights, ``gamma[i, j]`` couples channel j into i
        inverse: Multiply instead of divide (IGDN)
        beta_min: Lower bound enforced on beta
        validate: Check the parameter constraints

    Raises:
        ParameterError: If beta < beta_min or gamma < 0 anywhere
        ArgumentError: On shape mismatch
    """
    squeeze = x.dim() == 3
    if squeeze:
        x = x.unsqueeze(0)
    channels = x.shape[1]
    if beta.shape != (channels,) or gamma.shape != (channels, channels):
        raise ArgumentError(
            f"GDN over {channels} channels needs beta [{channels}] and gamma "
            f"[{channels}, {channels}], got {tuple(beta.shape)} and {tuple(gamma.shape)}"
        )
    if validate:
        if bool((beta < beta_min).any()):
            raise ParameterError(f"GDN beta must be >= {beta_min}")
        if bool((gamma < 0).any()):
            raise ParameterError("GDN gamma must be nonnegative")

    norm = F.conv2d(x * x, gamma.view(channels, channels, 1, 1), beta)
    norm = torch.sqrt(norm)
    out = x * norm if inverse else x / norm
    return out.squeeze(0) if squeeze else out


class _LowerBound(torch.autograd.Function):
    """``max(x, bound)`` whose gradient still flows when it pushes x upwards."""

    @staticmethod
    def forward(ctx, x, bound):
        ctx.save_for_backward(x)
        ctx.bound = bound
        return torch.clamp(x, min=bound)

    @staticmethod
    def backward(ctx, grad_output):
        (x,) = ctx.saved_tensors
        pass_through = (x >= ctx.bound) | (grad_output < 0)
        return grad_output * pass_through.to(grad_output.dtype), None


class NonNegativeParametrizer(nn.Module):
    """Stores ``sqrt(v + pedestal)`` and maps back to ``v >= minimum``."""

    def __init__(self, minimum: float = 0.0, reparam_offset: float = 2**-18):
        super().__init__()
        self.minimum = float(minimum)
        self.pedestal = reparam_offset**2
        self.bound = (self.minimum + self.pedestal) ** 0.5

    def init(self, value: torch.Tensor) -> torch.Tensor:
        return torch.sqrt(torch.clamp(value + self.pedestal, min=self.pedestal))

    def forward(self, stored: torch.Tensor) -> torch.Tensor:
        bounded = _LowerBound.apply(stored, self.bound)
        return bounded * bounded - self.pedestal


class GDN(nn.Module):
    """
    GDN layer with learned, constraint-preserving parameters.

    Args:
        channels: Number of channels
        inverse: Build IGDN instead of GDN
        beta_min: Lower bound on beta
        gamma_init: Initial diagonal value of gamma
    """

    def __init__(self, channels: int, inverse: bool = False, beta_min: float = BETA_MIN, gamma_init: float = 0.1):
        super().__init__()
        self.inverse = inverse
        self.beta_min = beta_min
        self.beta_reparam = NonNegativeParametrizer(minimum=beta_min)
        self.gamma_reparam = NonNegativeParametrizer()
        self.beta = nn.Parameter(self.beta_reparam.init(torch.ones(channels)))
        self.gamma = nn.Parameter(self.gamma_reparam.init(gamma_init * torch.eye(channels)))

    def effective_params(self):
        """Return the constrained ``(beta, gamma)`` actually applied."""
        beta = torch.clamp(self.beta_reparam(self.beta), min=self.beta_min)
        gamma = torch.clamp(self.gamma_reparam(self.gamma), min=0.0)
        return beta, gamma

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        beta, gamma = self.effective_params()
        return gdn(x, beta, gamma, inverse=self.inverse, beta_min=self.beta_min, validate=False)
