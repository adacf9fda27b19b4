"""
Integer CDF tables for the range coder.

Masses are quantized to 16-bit frequencies with largest-remainder rounding,
then every zero frequency is raised to 1 by taking counts from the most
probable symbols. All arithmetic after the float64 masses is integer numpy,
so identical masses give identical tables on every platform.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import torch

from ctxcodec.entropy.factorized import FactorizedPrior
from ctxcodec.entropy.laplace import EntropyParams, ProbabilityTable, laplace_table
from ctxcodec.exceptions import ArgumentError, SymbolRangeError

PRECISION_BITS = 16
TOTAL_FREQUENCY = 1 << PRECISION_BITS


@dataclass
class CdfTable:
    """
    Cumulative frequencies for ``M`` coding contexts.

    Attributes:
        cdf: ``[M, S + 1]`` int64, row ``i`` runs from 0 to 65536, strictly increasing
        offsets: ``[M]`` int64 symbol value of column 0 in each row
    """

    cdf: np.ndarray
    offsets: np.ndarray

    @property
    def num_rows(self) -> int:
        return int(self.cdf.shape[0])

    @property
    def num_symbols(self) -> int:
        return int(self.cdf.shape[1]) - 1

    def frequencies(self) -> np.ndarray:
        return np.diff(self.cdf, axis=1)

    def columns_of(self, symbols: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Column index of each symbol in its row.

        Raises:
            SymbolRangeError: If a symbol lies outside its row
        """
        symbols = np.asarray(symbols, dtype=np.int64).reshape(-1)
        offsets = self.offsets if rows is None else self.offsets[rows]
        columns = symbols - offsets
        if columns.size and (columns.min() < 0 or columns.max() >= self.num_symbols):
            raise SymbolRangeError(f"symbol outside its {self.num_symbols}-symbol table")
        return columns

    def symbol_bits(self, symbols: np.ndarray) -> float:
        """Ideal code length ``sum -log2 q_i`` in bits under the quantized frequencies."""
        columns = self.columns_of(symbols)
        rows = np.arange(columns.size)
        freqs = self.cdf[rows, columns + 1] - self.cdf[rows, columns]
        return float(np.sum(PRECISION_BITS - np.log2(freqs)))


def quantize_masses(masses: np.ndarray) -> np.ndarray:
    """
    Integer frequencies summing to ``TOTAL_FREQUENCY`` per row, each at least 1.

    Args:
        masses: ``[M, S]`` nonnegative float masses (rows are renormalized)
    """
    masses = np.asarray(masses, dtype=np.float64)
    if masses.ndim != 2 or masses.shape[1] < 1:
        raise ArgumentError(f"masses must be [M, S], got shape {masses.shape}")
    rows, symbols = masses.shape
    if symbols > TOTAL_FREQUENCY:
        raise SymbolRangeError(f"{symbols} symbols do not fit {PRECISION_BITS}-bit frequencies")
    if not np.all(np.isfinite(masses)) or np.any(masses < 0):
        raise ArgumentError("masses must be finite and nonnegative")
    totals = masses.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ArgumentError("every row needs positive total mass")

    scaled = masses / totals * TOTAL_FREQUENCY
    freqs = np.floor(scaled).astype(np.int64)
    remainder = scaled - freqs
    deficit = TOTAL_FREQUENCY - freqs.sum(axis=1)
    # Hand the missing counts to the largest remainders (ties by column).
    order = np.argsort(-remainder, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(symbols)[None, :].repeat(rows, axis=0), axis=1)
    freqs += (ranks < deficit[:, None]).astype(np.int64)

    for row in np.nonzero((freqs == 0).any(axis=1))[0]:
        _raise_zero_frequencies(freqs[row])
    return freqs


def _raise_zero_frequencies(freq: np.ndarray) -> None:
    zeros = freq == 0
    needed = int(zeros.sum())
    freq[zeros] = 1
    while needed > 0:
        donor = int(np.argmax(freq))
        take = min(needed, int(freq[donor]) - 1)
        if take <= 0:
            raise SymbolRangeError("too many symbols for the frequency precision")
        freq[donor] -= take
        needed -= take


def cdf_from_masses(masses: np.ndarray, offsets: Optional[np.ndarray] = None) -> CdfTable:
    freqs = quantize_masses(masses)
    cdf = np.zeros((freqs.shape[0], freqs.shape[1] + 1), dtype=np.int64)
    np.cumsum(freqs, axis=1, out=cdf[:, 1:])
    if offsets is None:
        offsets = np.zeros(freqs.shape[0], dtype=np.int64)
    return CdfTable(cdf=cdf, offsets=np.asarray(offsets, dtype=np.int64).reshape(-1))


def build_cdf(
    source: Union[EntropyParams, ProbabilityTable, FactorizedPrior, np.ndarray, torch.Tensor],
    r: Optional[int] = None,
) -> CdfTable:
    """
    Quantized CDF tables.

    Args:
        source: Laplace parameters (one row per element), a folded
            ``ProbabilityTable``, a factorized prior (one row per channel) or a
            raw ``[M, S]`` mass array (symbols ``0 .. S - 1``)
        r: Symbol half-range; required for Laplace parameters and factorized priors

    Returns:
        ``CdfTable`` with total frequency 65536
    """
    if isinstance(source, EntropyParams):
        if r is None:
            raise ArgumentError("build_cdf needs r for Laplace parameters")
        source = laplace_table(source, r)
    if isinstance(source, ProbabilityTable):
        offsets = source.centers.cpu().numpy() - source.r
        return cdf_from_masses(source.masses.cpu().numpy(), offsets)
    if isinstance(source, FactorizedPrior):
        if r is None:
            raise ArgumentError("build_cdf needs r for a factorized prior")
        masses = source.channel_table(r).numpy()
        return cdf_from_masses(masses, np.full(masses.shape[0], -r, dtype=np.int64))
    if isinstance(source, torch.Tensor):
        source = source.detach().cpu().double().numpy()
    return cdf_from_masses(np.atleast_2d(source))
