"""
Discretized Laplace model for quantized latents.

The probability of integer symbol ``k`` is the Laplace(mu, sigma) mass over
``[k - 1/2, k + 1/2]`` (the Laplace density convolved with a unit uniform).
``sigma`` is the Laplace *scale* parameter, not the standard deviation; it
is bounded below by ``SIGMA_MIN``.
"""

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError, ParameterError, SymbolRangeError
from ctxcodec.layers.quantization import is_integral, round_half_away

SIGMA_MIN = 0.01
LIKELIHOOD_BOUND = 1e-9
DEFAULT_SYMBOL_RANGE = 32


@dataclass
class EntropyParams:
    """Per-element Laplace location ``mu`` and scale ``sigma`` (same shape as the latents)."""

    mu: torch.Tensor
    sigma: torch.Tensor

    def __post_init__(self):
        if self.mu.shape != self.sigma.shape:
            raise ArgumentError(
                f"mu {tuple(self.mu.shape)} and sigma {tuple(self.sigma.shape)} differ in shape"
            )

    def check(self, sigma_min: float = SIGMA_MIN) -> None:
        # Allow float32 round-off right at the bound.
        if bool((self.sigma < sigma_min * (1 - 1e-6)).any()):
            raise ParameterError(f"Laplace scale below sigma_min={sigma_min}")

    def flatten(self) -> "EntropyParams":
        return EntropyParams(self.mu.reshape(-1), self.sigma.reshape(-1))

    def detach(self) -> "EntropyParams":
        return EntropyParams(self.mu.detach(), self.sigma.detach())


def positive_scale(raw: torch.Tensor, sigma_min: float = SIGMA_MIN) -> torch.Tensor:
    """Smooth map from an unconstrained tensor to scales ``>= sigma_min``."""
    return sigma_min + F.softplus(raw)


def laplace_cdf(x: torch.Tensor, mu: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
    t = (x - mu) / sigma
    return torch.where(t < 0, 0.5 * torch.exp(t), 1.0 - 0.5 * torch.exp(-t))


def _interval_mass(lower: torch.Tensor, upper: torch.Tensor) -> torch.Tensor:
    """
    Mass of the standard Laplace between standardized bounds ``lower < upper``.

    Each branch subtracts tail terms of the same side so precision holds far
    from the mode.
    """
    above = 0.5 * (torch.exp(-lower.clamp(min=0)) - torch.exp(-upper.clamp(min=0)))
    below = 0.5 * (torch.exp(upper.clamp(max=0)) - torch.exp(lower.clamp(max=0)))
    across = 1.0 - 0.5 * torch.exp(-upper.clamp(min=0)) - 0.5 * torch.exp(lower.clamp(max=0))
    return torch.where(lower >= 0, above, torch.where(upper <= 0, below, across))


def laplace_mass(symbols: torch.Tensor, params: EntropyParams) -> torch.Tensor:
    """
    Unfolded Laplace mass ``F(k + 1/2) - F(k - 1/2)`` of each symbol.

    Args:
        symbols: Values ``k`` (integer-valued for coding; real values are
            accepted for the noisy training relaxation)
        params: Laplace parameters broadcastable to ``symbols``

    Raises:
        ParameterError: If any sigma is below ``SIGMA_MIN``
    """
    params.check()
    lower = (symbols - 0.5 - params.mu) / params.sigma
    upper = (symbols + 0.5 - params.mu) / params.sigma
    return _interval_mass(lower, upper)


def rate_bits(values: torch.Tensor, params: EntropyParams, bound: float = LIKELIHOOD_BOUND) -> torch.Tensor:
    """Cross-entropy in bits of ``values`` under the model (differentiable, no integer check)."""
    mass = laplace_mass(values, params).clamp(min=bound)
    return -torch.log2(mass).sum()


def estimate_rate(symbols: torch.Tensor, params: EntropyParams) -> torch.Tensor:
    """
    Ideal code length ``sum_i -log2 mass(symbol_i)`` in bits.

    Raises:
        ArgumentError: If ``symbols`` are not integer-valued
    """
    if not is_integral(symbols):
        raise ArgumentError("estimate_rate needs integer-valued symbols")
    return rate_bits(symbols, params)


@dataclass
class ProbabilityTable:
    """
    Folded per-element probability masses.

    Row ``i`` covers symbols ``centers[i] - r .. centers[i] + r``; the two edge
    symbols carry the folded tail mass.

    Attributes:
        masses: ``[M, 2r + 1]`` float64 tensor
        centers: ``[M]`` int64 tensor
        r: Half-width of the symbol range
    """

    masses: torch.Tensor
    centers: torch.Tensor
    r: int

    @property
    def num_symbols(self) -> int:
        return 2 * self.r + 1

    def index_of(self, symbols: torch.Tensor) -> torch.Tensor:
        """
        Map symbol values to column indices.

        Raises:
            SymbolRangeError: If a symbol lies outside its row's range
        """
        index = symbols.reshape(-1).to(torch.int64) - self.centers + self.r
        if index.numel() and (int(index.min()) < 0 or int(index.max()) > 2 * self.r):
            raise SymbolRangeError(f"symbol outside the +/-{self.r} range of its table")
        return index

    def symbol_of(self, row: int, index: int) -> int:
        return int(self.centers[row]) + index - self.r


def required_range(symbols: torch.Tensor, centers: torch.Tensor, minimum: int = DEFAULT_SYMBOL_RANGE) -> int:
    """Smallest admissible ``r``: covers every ``|symbol - center|`` and is at least ``minimum``."""
    if symbols.numel() == 0:
        return minimum
    spread = int((symbols.reshape(-1).to(torch.int64) - centers.reshape(-1)).abs().max())
    return max(spread, minimum)


def laplace_centers(params: EntropyParams) -> torch.Tensor:
    return round_half_away(params.mu.reshape(-1).double()).to(torch.int64)


def laplace_table(params: EntropyParams, r: int) -> ProbabilityTable:
    """
    Folded Laplace tables for every element of ``params``.

    Masses are computed in float64. Interior symbols get
    ``F(k + 1/2) - F(k - 1/2)``; the edge symbols get everything beyond them.
    """
    params.check()
    if r < 1:
        raise ArgumentError(f"symbol range must be >= 1, got: {r}")
    mu = params.mu.reshape(-1, 1).double()
    sigma = params.sigma.reshape(-1, 1).double()
    centers = laplace_centers(params)
    offsets = torch.arange(-r, r + 1, dtype=torch.float64).view(1, -1)
    k = centers.view(-1, 1).double() + offsets
    lower = (k - 0.5 - mu) / sigma
    upper = (k + 0.5 - mu) / sigma
    inf = torch.tensor(float("inf"), dtype=torch.float64)
    lower[:, 0] = -inf
    upper[:, -1] = inf
    masses = _interval_mass(lower, upper)
    return ProbabilityTable(masses=masses, centers=centers, r=r)
