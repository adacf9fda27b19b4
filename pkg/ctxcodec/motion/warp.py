"""
Differentiable backward warping with bilinear sampling.

``warp(src, flow)(p) = src(p + flow(p))`` where flow channel 0 is the
horizontal and channel 1 the vertical displacement in pixels. Sample
positions outside the frame are clamped to the border (replication).

Sampling is written out with explicit gathers rather than ``grid_sample``:
a zero or integer flow then reproduces source pixels exactly, with no
coordinate normalisation round-off.
"""

import torch

from ctxcodec.exceptions import ArgumentError


def _base_grid(height: int, width: int, like: torch.Tensor):
    ys = torch.arange(height, dtype=like.dtype, device=like.device).view(1, height, 1)
    xs = torch.arange(width, dtype=like.dtype, device=like.device).view(1, 1, width)
    return xs, ys


def warp_bilinear(source: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """
    Backward-warp ``source`` by ``flow``.

    Args:
        source: ``[N, C, H, W]`` or ``[C, H, W]`` tensor
        flow: ``[N, 2, H, W]`` or ``[2, H, W]`` displacement in pixels

    Returns:
        Warped tensor with the shape of ``source``

    Raises:
        ArgumentError: If the spatial dims (or batch sizes) differ
    """
    squeeze = source.dim() == 3
    src = source.unsqueeze(0) if squeeze else source
    flw = flow.unsqueeze(0) if flow.dim() == 3 else flow
    if src.dim() != 4 or flw.dim() != 4 or flw.shape[1] != 2:
        raise ArgumentError(
            f"warp needs source [N, C, H, W] and flow [N, 2, H, W], got "
            f"{tuple(source.shape)} and {tuple(flow.shape)}"
        )
    if src.shape[-2:] != flw.shape[-2:] or src.shape[0] != flw.shape[0]:
        raise ArgumentError(
            f"flow {tuple(flow.shape)} does not match source {tuple(source.shape)}"
        )

    batch, channels, height, width = src.shape
    xs, ys = _base_grid(height, width, flw)
    px = (xs + flw[:, 0]).clamp(0, width - 1)
    py = (ys + flw[:, 1]).clamp(0, height - 1)

    x0 = torch.floor(px)
    y0 = torch.floor(py)
    wx = px - x0
    wy = py - y0
    x0 = x0.long()
    y0 = y0.long()
    x1 = (x0 + 1).clamp(max=width - 1)
    y1 = (y0 + 1).clamp(max=height - 1)

    flat = src.reshape(batch, channels, height * width)

    def gather(yi: torch.Tensor, xi: torch.Tensor) -> torch.Tensor:
        index = (yi * width + xi).view(batch, 1, height * width).expand(batch, channels, -1)
        return flat.gather(2, index).view(batch, channels, height, width)

    wx = wx.unsqueeze(1)
    wy = wy.unsqueeze(1)
    top = gather(y0, x0) * (1 - wx) + gather(y0, x1) * wx
    bottom = gather(y1, x0) * (1 - wx) + gather(y1, x1) * wx
    out = top * (1 - wy) + bottom * wy
    return out.squeeze(0) if squeeze else out
