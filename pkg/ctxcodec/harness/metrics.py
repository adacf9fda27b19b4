"""
Quality metrics: PSNR and MS-SSIM on RGB frames in [0, 1].

MS-SSIM uses an 11-tap Gaussian window (sigma 1.5), five scales with the
usual weights and ``K1 = 0.01``, ``K2 = 0.03``. It is computed per channel
and averaged over channels and frames. Negative contrast terms are floored
at 1e-8. At coarse scales the window shrinks to the largest odd size that
fits. Identical inputs give exactly 1.0.
"""

import math
from typing import Sequence, Union

import torch
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError

PSNR_CAP = 100.0
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MS_SSIM_MIN_SIDE = 160
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1, K2 = 0.01, 0.03
CONTRAST_FLOOR = 1e-8


def _pair(a: torch.Tensor, b: torch.Tensor):
    if a.shape != b.shape:
        raise ArgumentError(f"shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    if a.dim() == 3:
        a, b = a.unsqueeze(0), b.unsqueeze(0)
    if a.dim() != 4:
        raise ArgumentError(f"expected [C, H, W] or [N, C, H, W], got {tuple(a.shape)}")
    return a, b


def psnr(a: torch.Tensor, b: torch.Tensor, max_value: float = 1.0) -> float:
    """
    Peak signal-to-noise ratio in dB, averaged over the batch and capped at 100 dB.

    Args:
        a, b: ``[3, H, W]`` frames or ``[N, 3, H, W]`` batches
        max_value: Peak signal value
    """
    a, b = _pair(a, b)
    mse = ((a.double() - b.double()) ** 2).flatten(1).mean(dim=1)
    values = []
    for m in mse.tolist():
        values.append(PSNR_CAP if m == 0 else min(PSNR_CAP, 10.0 * math.log10(max_value**2 / m)))
    return sum(values) / len(values)


def sequence_psnr(recon: Sequence[torch.Tensor], reference: Sequence[torch.Tensor]) -> float:
    """Frame-averaged PSNR."""
    if len(recon) != len(reference) or not recon:
        raise ArgumentError("sequences must be non-empty and of equal length")
    return sum(psnr(a, b) for a, b in zip(recon, reference)) / len(recon)


def gaussian_window(size: int, sigma: float = WINDOW_SIGMA, dtype=torch.float32, device=None) -> torch.Tensor:
    coords = torch.arange(size, dtype=dtype, device=device) - (size - 1) / 2.0
    g = torch.exp(-(coords**2) / (2 * sigma**2))
    return g / g.sum()


def _filter(x: torch.Tensor, window: torch.Tensor) -> torch.Tensor:
    channels = x.shape[1]
    size = window.numel()
    horizontal = window.view(1, 1, 1, size).expand(channels, 1, 1, size)
    vertical = window.view(1, 1, size, 1).expand(channels, 1, size, 1)
    return F.conv2d(F.conv2d(x, horizontal, groups=channels), vertical, groups=channels)


def _ssim_terms(x: torch.Tensor, y: torch.Tensor, data_range: float):
    """Per-channel mean luminance-contrast-structure and contrast-structure maps, ``[N, C]`` each."""
    size = min(WINDOW_SIZE, x.shape[-2], x.shape[-1])
    if size % 2 == 0:
        size -= 1
    window = gaussian_window(size, dtype=x.dtype, device=x.device)
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2

    mu_x = _filter(x, window)
    mu_y = _filter(y, window)
    var_x = _filter(x * x, window) - mu_x * mu_x
    var_y = _filter(y * y, window) - mu_y * mu_y
    cov = _filter(x * y, window) - mu_x * mu_y

    cs_map = (2 * cov + c2) / (var_x + var_y + c2)
    luminance = (2 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    cs = cs_map.flatten(2).mean(dim=2)
    ssim = (luminance * cs_map).flatten(2).mean(dim=2)
    return ssim, cs


def ms_ssim_batch(a: torch.Tensor, b: torch.Tensor, data_range: float = 1.0) -> torch.Tensor:
    """
    Differentiable MS-SSIM of each item, ``[N]``, channel-averaged.

    Raises:
        ArgumentError: If either spatial side is below 160 pixels
    """
    a, b = _pair(a, b)
    if min(a.shape[-2:]) < MS_SSIM_MIN_SIDE:
        raise ArgumentError(
            f"MS-SSIM needs both sides >= {MS_SSIM_MIN_SIDE}, got {a.shape[-1]}x{a.shape[-2]}"
        )
    weights = torch.tensor(MS_SSIM_WEIGHTS, dtype=a.dtype, device=a.device)
    levels = weights.numel()
    result = torch.ones(a.shape[:2], dtype=a.dtype, device=a.device)
    x, y = a, b
    for level in range(levels):
        ssim, cs = _ssim_terms(x, y, data_range)
        if level < levels - 1:
            result = result * cs.clamp(min=CONTRAST_FLOOR) ** weights[level]
            padding = (x.shape[-2] % 2, x.shape[-1] % 2)
            x = F.avg_pool2d(x, kernel_size=2, padding=padding)
            y = F.avg_pool2d(y, kernel_size=2, padding=padding)
        else:
            result = result * ssim.clamp(min=CONTRAST_FLOOR) ** weights[level]
    return result.mean(dim=1)


def ms_ssim(a: Union[torch.Tensor, Sequence[torch.Tensor]], b, data_range: float = 1.0) -> float:
    """
    MS-SSIM averaged over frames.

    Args:
        a, b: Frames ``[3, H, W]``, batches ``[N, 3, H, W]`` or equal-length
            lists of frames
    """
    if isinstance(a, (list, tuple)) or isinstance(b, (list, tuple)):
        if len(a) != len(b) or not a:
            raise ArgumentError("sequences must be non-empty and of equal length")
        a, b = torch.stack(list(a)), torch.stack(list(b))
    with torch.no_grad():
        return float(ms_ssim_batch(a.double(), b.double(), data_range).mean())
