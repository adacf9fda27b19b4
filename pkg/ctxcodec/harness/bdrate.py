"""
Bjontegaard delta rate between two rate-distortion curves.

Each curve is fitted as ln(bpp) against quality with a least-squares cubic
and the fits are integrated exactly over the overlapping quality interval.
When either cubic is not monotone over that interval both curves are
integrated with piecewise cubic Hermite (PCHIP) interpolation instead.
Negative results mean the test codec saves bitrate.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import scipy.interpolate

from ctxcodec.exceptions import ArgumentError, OverlapError

logger = logging.getLogger(__name__)

MIN_POINTS = 4
MONOTONE_SAMPLES = 1001


@dataclass(frozen=True)
class RDPoint:
    bpp: float
    quality: float

    def __post_init__(self):
        if not self.bpp > 0:
            raise ArgumentError(f"bpp must be positive, got: {self.bpp}")
        if not math.isfinite(self.quality):
            raise ArgumentError(f"quality must be finite, got: {self.quality}")


@dataclass
class RDCurve:
    """Points ordered by strictly increasing bpp."""

    points: List[RDPoint] = field(default_factory=list)
    codec: str = ""
    sequence: str = ""

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: p.bpp)
        rates = [p.bpp for p in self.points]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ArgumentError(f"curve {self.codec}/{self.sequence} has repeated bpp values")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]], codec: str = "", sequence: str = "") -> "RDCurve":
        return cls([RDPoint(b, q) for b, q in pairs], codec, sequence)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(quality, ln bpp)`` sorted by quality."""
        quality = np.array([p.quality for p in self.points], dtype=np.float64)
        log_rate = np.log(np.array([p.bpp for p in self.points], dtype=np.float64))
        order = np.argsort(quality, kind="stable")
        return quality[order], log_rate[order]


def _is_monotone(poly: np.poly1d, lo: float, hi: float) -> bool:
    slope = np.polyder(poly)(np.linspace(lo, hi, MONOTONE_SAMPLES))
    return bool(np.all(slope >= 0) or np.all(slope <= 0))


def _pchip_integral(quality: np.ndarray, log_rate: np.ndarray, lo: float, hi: float) -> float:
    if np.any(np.diff(quality) <= 0):
        raise ArgumentError("PCHIP fallback needs strictly increasing quality values")
    return float(scipy.interpolate.PchipInterpolator(quality, log_rate).integrate(lo, hi))


def bd_rate(anchor: RDCurve, test: RDCurve) -> float:
    """
    Average bitrate difference of ``test`` against ``anchor`` in percent.

    Raises:
        ArgumentError: If a curve has fewer than 4 points
        OverlapError: If the quality ranges do not overlap
    """
    for curve in (anchor, test):
        if len(curve.points) < MIN_POINTS:
            raise ArgumentError(f"BD-rate needs >= {MIN_POINTS} points per curve, got {len(curve.points)}")
    q1, r1 = anchor.arrays()
    q2, r2 = test.arrays()
    lo = max(q1.min(), q2.min())
    hi = min(q1.max(), q2.max())
    if lo >= hi:
        raise OverlapError(f"quality ranges [{q1.min()}, {q1.max()}] and [{q2.min()}, {q2.max()}] do not overlap")

    p1 = np.poly1d(np.polyfit(q1, r1, 3))
    p2 = np.poly1d(np.polyfit(q2, r2, 3))
    if _is_monotone(p1, lo, hi) and _is_monotone(p2, lo, hi):
        i1, i2 = np.polyint(p1), np.polyint(p2)
        int1 = i1(hi) - i1(lo)
        int2 = i2(hi) - i2(lo)
    else:
        logger.info("cubic fit not monotone on [%g, %g], using PCHIP", lo, hi)
        int1 = _pchip_integral(q1, r1, lo, hi)
        int2 = _pchip_integral(q2, r2, lo, hi)
    avg_log_diff = (int2 - int1) / (hi - lo)
    return (math.exp(avg_log_diff) - 1.0) * 100.0
