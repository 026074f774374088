"""Gap-certified numerical rank and subspace utilities.

Homology dimensions are integers read off singular values, so every rank
decision carries the ratio between the singular values on either side of the
cut.  A ratio below :data:`GAP_MIN` marks the decision as unreliable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

DEFAULT_TOL = 1e-9
DEFAULT_ATOL = 1e-12
GAP_MIN = 10.0


class GapWarning(UserWarning):
    """A rank decision whose spectral gap ratio is below ``GAP_MIN``."""


class UnreliableRankError(ValueError):
    """Raised when a harness is handed gap-flagged rank data."""


@dataclass(frozen=True)
class RankDecision:
    rank: int
    singular_values: np.ndarray
    threshold: float
    gap_ratio: float

    @property
    def reliable(self) -> bool:
        return self.gap_ratio >= GAP_MIN

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "threshold": self.threshold,
            "gap_ratio": _finite_or_none(self.gap_ratio),
            "singular_values": [float(s) for s in self.singular_values],
        }


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def numerical_rank(A, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> RankDecision:
    """Rank of ``A`` counting singular values above ``max(tol*sigma_max, atol)``.

    The gap ratio is smallest-kept over largest-dropped.  When nothing is dropped
    the threshold stands in for the dropped side, and when nothing is kept it
    stands in for the kept side, so a value hugging the threshold is flagged
    either way.
    """
    A = np.asarray(A)
    if A.size == 0:
        return RankDecision(0, np.zeros(0), 0.0, math.inf)
    s = linalg.svd(A, compute_uv=False)
    smax = float(s[0]) if len(s) else 0.0
    threshold = max(tol * smax, atol)
    kept = s[s > threshold]
    dropped = s[s <= threshold]
    if len(kept) and len(dropped):
        gap = float(kept[-1] / dropped[0]) if dropped[0] > 0 else math.inf
    elif len(kept):
        gap = float(kept[-1] / threshold)
    else:
        gap = float(threshold / dropped[0]) if dropped[0] > 0 else math.inf
    return RankDecision(len(kept), s, threshold, gap)


def warn_if_unreliable(decisions, context: str) -> list[str]:
    msgs = []
    for key, dec in decisions:
        if not dec.reliable:
            msg = f"{context}: rank decision {key} has gap ratio {dec.gap_ratio:.3g} < {GAP_MIN:g}"
            warnings.warn(msg, GapWarning, stacklevel=3)
            msgs.append(msg)
    return msgs


def range_basis(A, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> tuple[np.ndarray, RankDecision]:
    """Orthonormal basis of the column space of ``A``."""
    A = np.asarray(A)
    m = A.shape[0]
    if A.size == 0:
        return np.zeros((m, 0), dtype=complex), numerical_rank(A, tol, atol)
    U, s, _ = linalg.svd(A, full_matrices=True)
    dec = numerical_rank(A, tol, atol)
    return U[:, :dec.rank], dec


def null_basis(A, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> tuple[np.ndarray, RankDecision]:
    """Orthonormal basis of the kernel of ``A``."""
    A = np.asarray(A)
    n = A.shape[1]
    if A.size == 0:
        return np.eye(n, dtype=complex), numerical_rank(A, tol, atol)
    _, _, Vh = linalg.svd(A, full_matrices=True)
    dec = numerical_rank(A, tol, atol)
    return Vh[dec.rank:].conj().T, dec


def orth_complement(Q: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the complement of the orthonormal columns ``Q`` in C^n."""
    if Q.shape[1] == 0:
        return np.eye(n, dtype=complex)
    if Q.shape[1] >= n:
        return np.zeros((n, 0), dtype=complex)
    U, _, _ = linalg.svd(Q, full_matrices=True)
    return U[:, Q.shape[1]:]


def subspace_distance(Q1: np.ndarray, Q2: np.ndarray) -> float:
    """Spectral-norm distance between orthogonal projections onto two column spaces."""
    P1 = Q1 @ Q1.conj().T
    P2 = Q2 @ Q2.conj().T
    diff = P1 - P2
    return float(linalg.norm(diff, 2)) if diff.size else 0.0


def opnorm(A) -> float:
    A = np.asarray(A)
    return float(linalg.norm(A, 2)) if A.size else 0.0
