"""
Causal (raster-order) masked convolution for autoregressive priors.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F


def raster_mask(kernel_size: int) -> torch.Tensor:
    """
    ``[k, k]`` mask that keeps only taps strictly before the centre in raster order.
    """
    mask = torch.zeros(kernel_size, kernel_size)
    center = kernel_size // 2
    mask[:center, :] = 1.0
    mask[center, :center] = 1.0
    return mask


class MaskedConv2d(nn.Conv2d):
    """
    Convolution whose output at a position only sees inputs strictly before it.

    The mask is applied to the weight on every call, so the stored weight may
    hold arbitrary values at masked taps without breaking causality.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 5):
        super().__init__(in_channels, out_channels, kernel_size, padding=kernel_size // 2)
        self.register_buffer("mask", raster_mask(kernel_size)[None, None])

    def masked_weight(self) -> torch.Tensor:
        return self.weight * self.mask

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.conv2d(x, self.masked_weight(), self.bias, padding=self.padding)

    def forward_patch(self, patch: torch.Tensor) -> torch.Tensor:
        """Apply to a ``[N, C, k, k]`` patch centred on one position, giving ``[N, C_out, 1, 1]``."""
        return F.conv2d(patch, self.masked_weight(), self.bias)
