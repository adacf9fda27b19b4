"""
Residue coding versus conditional coding on finite alphabets.

For any joint pmf of ``(x, x_pred)``, the entropy of the residue
``x - x_pred`` is never below the conditional entropy ``H(x | x_pred)``.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.stats import entropy

from ctxcodec.exceptions import ArgumentError

SUM_TOLERANCE = 1e-12
GAP_TOLERANCE = 1e-12


@dataclass
class JointPmf:
    """``probs[x, x_pred]`` over the alphabet ``0 .. A - 1``."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2 or self.probs.shape[0] != self.probs.shape[1]:
            raise ArgumentError(f"joint pmf must be a square matrix, got shape {self.probs.shape}")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > SUM_TOLERANCE:
            raise ArgumentError("joint pmf must be nonnegative and sum to 1")

    @property
    def alphabet(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def independent(cls, px: np.ndarray, ppred: np.ndarray) -> "JointPmf":
        return cls(np.outer(px, ppred))

    @classmethod
    def random(cls, alphabet: int, rng: np.random.Generator, concentration: float = 1.0) -> "JointPmf":
        probs = rng.dirichlet(np.full(alphabet * alphabet, concentration)).reshape(alphabet, alphabet)
        return cls(probs / probs.sum())


def residue_distribution(joint: JointPmf) -> np.ndarray:
    """Masses of ``d = x - x_pred`` for ``d = -(A - 1) .. A - 1``."""
    a = joint.alphabet
    return np.array([np.trace(joint.probs, offset=-d) for d in range(-(a - 1), a)])


def entropy_gap(joint: JointPmf) -> Tuple[float, float]:
    """
    ``(H_residue, H_conditional)`` in bits, by exact enumeration.
    """
    h_residue = float(entropy(residue_distribution(joint), base=2))
    p_pred = joint.probs.sum(axis=0)
    h_conditional = 0.0
    for column, weight in enumerate(p_pred):
        if weight > 0:
            h_conditional += weight * float(entropy(joint.probs[:, column], base=2))
    return max(h_residue, 0.0), max(h_conditional, 0.0)


@dataclass
class EntropyDemoReport:
    alphabet: int
    trials: int
    violations: int
    min_gap: float
    mean_gap: float
    uniform_residue: float
    uniform_conditional: float


def entropy_demo(alphabet: int = 4, trials: int = 1000, seed: Optional[int] = 0) -> EntropyDemoReport:
    """
    Check ``H(x - x_pred) >= H(x | x_pred)`` on random Dirichlet joint pmfs.

    Also reports the independent-uniform case for reference.
    """
    if alphabet < 1 or trials < 1:
        raise ArgumentError("alphabet and trials must be >= 1")
    rng = np.random.default_rng(seed)
    gaps = []
    for _ in range(trials):
        h_res, h_cond = entropy_gap(JointPmf.random(alphabet, rng))
        gaps.append(h_res - h_cond)
    gaps = np.asarray(gaps)
    uniform = np.full(alphabet, 1.0 / alphabet)
    u_res, u_cond = entropy_gap(JointPmf.independent(uniform, uniform))
    return EntropyDemoReport(
        alphabet=alphabet,
        trials=trials,
        violations=int(np.sum(gaps < -GAP_TOLERANCE)),
        min_gap=float(gaps.min()),
        mean_gap=float(gaps.mean()),
        uniform_residue=u_res,
        uniform_conditional=u_cond,
    )
