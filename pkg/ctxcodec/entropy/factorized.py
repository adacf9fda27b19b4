"""
Fully factorized prior for hyper latents.

Each channel has its own learned, strictly increasing cumulative function
``F_c``, built as a small chain of monotone dense layers (positive matrices,
biases, ``tanh`` factors bounded above -1). The mass of integer ``k`` is
``F_c(k + 1/2) - F_c(k - 1/2)``.
"""

import math
from typing import Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from ctxcodec.entropy.laplace import LIKELIHOOD_BOUND, ProbabilityTable, required_range
from ctxcodec.exceptions import ArgumentError
from ctxcodec.layers.quantization import is_integral


class FactorizedPrior(nn.Module):
    """
    Per-channel non-parametric density model.

    Args:
        channels: Number of channels
        filters: Hidden widths of the cumulative network
        init_scale: Initial spread of the modelled density
    """

    def __init__(self, channels: int, filters: Sequence[int] = (3, 3, 3), init_scale: float = 10.0):
        super().__init__()
        self.channels = channels
        dims = (1,) + tuple(filters) + (1,)
        scale = init_scale ** (1.0 / (len(dims) - 1))
        self.matrices = nn.ParameterList()
        self.biases = nn.ParameterList()
        self.factors = nn.ParameterList()
        for i in range(len(dims) - 1):
            init = math.log(math.expm1(1.0 / scale / dims[i + 1]))
            self.matrices.append(nn.Parameter(torch.full((channels, dims[i + 1], dims[i]), init)))
            self.biases.append(nn.Parameter(torch.rand(channels, dims[i + 1], 1) - 0.5))
            if i < len(dims) - 2:
                self.factors.append(nn.Parameter(torch.zeros(channels, dims[i + 1], 1)))

    def logits_cumulative(self, x: torch.Tensor) -> torch.Tensor:
        """
        Logit of ``F_c`` evaluated at ``x``.

        Args:
            x: ``[C, 1, M]`` points per channel
        """
        logits = x
        for i, matrix in enumerate(self.matrices):
            logits = torch.matmul(F.softplus(matrix), logits) + self.biases[i]
            if i < len(self.factors):
                logits = logits + torch.tanh(self.factors[i]) * torch.tanh(logits)
        return logits

    def _per_channel(self, z: torch.Tensor) -> torch.Tensor:
        if z.dim() != 4 or z.shape[1] != self.channels:
            raise ArgumentError(f"expected [N, {self.channels}, h, w] hyper latents, got {tuple(z.shape)}")
        return z.permute(1, 0, 2, 3).reshape(self.channels, 1, -1)

    def likelihood(self, z: torch.Tensor) -> torch.Tensor:
        """
        Mass of each (possibly noisy) value in ``z``, lower-bounded for stable log.

        Args:
            z: ``[N, C, h, w]``
        """
        values = self._per_channel(z)
        lower = self.logits_cumulative(values - 0.5)
        upper = self.logits_cumulative(values + 0.5)
        # Evaluate on the side where the sigmoids are far from 1.
        sign = -torch.sign(lower + upper).detach()
        sign = torch.where(sign == 0, torch.ones_like(sign), sign)
        mass = torch.abs(torch.sigmoid(sign * upper) - torch.sigmoid(sign * lower))
        mass = mass.clamp(min=LIKELIHOOD_BOUND)
        n, _, h, w = z.shape
        return mass.reshape(self.channels, n, h, w).permute(1, 0, 2, 3)

    def rate_bits(self, z: torch.Tensor) -> torch.Tensor:
        """Cross-entropy in bits of ``z`` (real or integer valued)."""
        return -torch.log2(self.likelihood(z)).sum()

    def cdf(self, x: torch.Tensor) -> torch.Tensor:
        """``F_c`` at ``x`` of shape ``[C, 1, M]``."""
        return torch.sigmoid(self.logits_cumulative(x))

    @torch.no_grad()
    def channel_table(self, r: int) -> torch.Tensor:
        """
        Folded masses of symbols ``-r .. r`` for each channel, ``[C, 2r + 1]`` float64.

        The edge symbols take ``F(-r + 1/2)`` and ``1 - F(r - 1/2)``.
        """
        dtype = self.matrices[0].dtype
        points = torch.arange(-r, r + 2, dtype=dtype, device=self.matrices[0].device) - 0.5
        points = points.view(1, 1, -1).expand(self.channels, 1, -1)
        logits = self.logits_cumulative(points).reshape(self.channels, -1).double().cpu()
        # F at the 2r + 2 boundaries, with the outermost pinned to 0 and 1.
        lower = torch.sigmoid(logits[:, :-1])
        upper = torch.sigmoid(logits[:, 1:])
        upper_tail = torch.sigmoid(-logits[:, 1:])
        lower_tail = torch.sigmoid(-logits[:, :-1])
        # Take differences on the side closer to 0 to keep precision in the tails.
        use_tail = (lower + upper) > 1.0
        masses = torch.where(use_tail, lower_tail - upper_tail, upper - lower)
        masses[:, 0] = torch.sigmoid(logits[:, 1])
        masses[:, -1] = torch.sigmoid(-logits[:, -2])
        return masses.clamp(min=0.0)


def factorized_mass(z_hat: torch.Tensor, prior: FactorizedPrior, r: int = 0) -> ProbabilityTable:
    """
    Per-element folded probability table of integer hyper latents.

    Args:
        z_hat: ``[N, C, h, w]`` integer-valued tensor
        prior: Factorized prior (weights)
        r: Symbol range; 0 picks the smallest admissible range (at least 32)

    Returns:
        Table with one row per element of ``z_hat`` in ``N, C, h, w`` order, centred on 0
    """
    if not is_integral(z_hat):
        raise ArgumentError("factorized_mass needs integer-valued hyper latents")
    n, c, h, w = z_hat.shape
    centers = torch.zeros(z_hat.numel(), dtype=torch.int64)
    if r <= 0:
        r = required_range(z_hat.cpu(), centers)
    per_channel = prior.channel_table(r)
    rows = per_channel.unsqueeze(0).unsqueeze(2).expand(n, c, h * w, -1).reshape(-1, 2 * r + 1)
    return ProbabilityTable(masses=rows.contiguous(), centers=centers, r=r)
