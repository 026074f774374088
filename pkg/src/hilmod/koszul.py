"""Koszul complexes of commuting tuples.

Chain space ``E_k`` is ``C^n (x) Lambda^k C^d`` laid out wedge-major: the
coordinate of ``xi (x) e_S`` with ``S`` the ``w``-th wedge of
:func:`~hilmod.basis.wedge_basis` and ``xi`` the ``a``-th module coordinate sits
at ``w*n + a``.  The boundary on ``xi (x) e_{i_1} ^ ... ^ e_{i_k}`` is
``sum_j (-1)^(j+1) T_{i_j} xi (x) e_{i_1} ^ .. hat(i_j) .. ^ e_{i_k}``.

Complexes are always assembled on the tuple written in orthonormal
coordinates, so plain conjugate transposes are the Hilbert-space adjoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .basis import wedge_basis
from .dspace import CommutingTuple, DASpace, as_point
from .rank import (DEFAULT_ATOL, DEFAULT_TOL, RankDecision, null_basis, numerical_rank, opnorm,
                   range_basis, subspace_distance, warn_if_unreliable)

COMPLEX_TOL = 1e-10


class ComplexError(ValueError):
    """Raised when consecutive boundaries do not compose to zero."""


@dataclass(frozen=True, eq=False)
class KoszulComplex:
    tuple: CommutingTuple
    dims: tuple[int, ...]
    boundaries: tuple[np.ndarray, ...]  # boundaries[k-1] is d_k : E_k -> E_{k-1}
    complex_residual: float

    @property
    def d(self) -> int:
        return len(self.dims) - 1

    def boundary(self, k: int) -> np.ndarray:
        """``d_k`` with the zero maps at ``k = 0`` and ``k = d+1`` included."""
        if k <= 0:
            return np.zeros((0, self.dims[0]), dtype=complex)
        if k > self.d:
            return np.zeros((self.dims[self.d], 0), dtype=complex)
        return self.boundaries[k - 1]


@dataclass(frozen=True, eq=False)
class HomologyReport:
    dims: tuple[int, ...]
    chain_dims: tuple[int, ...]
    decisions: tuple[RankDecision, ...]  # one per boundary d_1..d_d
    tol: float
    warnings: tuple[str, ...] = ()

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(dec.rank for dec in self.decisions)

    @property
    def gap_ratios(self) -> tuple[float, ...]:
        return tuple(dec.gap_ratio for dec in self.decisions)

    @property
    def singular_spectra(self) -> tuple[np.ndarray, ...]:
        return tuple(dec.singular_values for dec in self.decisions)

    @property
    def reliable(self) -> bool:
        return all(dec.reliable for dec in self.decisions)

    @property
    def min_gap(self) -> float:
        return min(self.gap_ratios, default=math.inf)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "chain_dims": list(self.chain_dims),
            "ranks": list(self.ranks),
            "gap_ratios": [g if math.isfinite(g) else None for g in self.gap_ratios],
            "reliable": self.reliable,
            "tol": self.tol,
        }


@dataclass(frozen=True, eq=False)
class DiracReport:
    dirac: np.ndarray
    harmonic_dims: tuple[int, ...]
    sigma_min: float
    invertible: bool
    decision: RankDecision
    grade_decisions: tuple[RankDecision, ...]
    self_adjoint_residual: float

    @property
    def reliable(self) -> bool:
        return self.decision.reliable and all(d.reliable for d in self.grade_decisions)


# ---------------------------------------------------------------------------
# assembly


def koszul_boundaries(mats: np.ndarray) -> list[np.ndarray]:
    """Boundary matrices ``d_1..d_d`` for the operator array ``mats`` of shape (d, n, n)."""
    d, n = mats.shape[0], mats.shape[1]
    out = []
    for k in range(1, d + 1):
        rows = {w.indices: r for r, w in enumerate(wedge_basis(d, k - 1))}
        cols = wedge_basis(d, k)
        B = np.zeros((n * len(rows), n * len(cols)), dtype=complex)
        for c, S in enumerate(cols):
            for j, i in enumerate(S.indices):
                r = rows[S.remove(j).indices]
                B[r * n:(r + 1) * n, c * n:(c + 1) * n] += (-1) ** j * mats[i - 1]
        out.append(B)
    return out


def complex_residual(boundaries: Sequence[np.ndarray]) -> float:
    """Largest ``||d_{k-1} d_k|| / max(1, ||d_{k-1}|| ||d_k||)`` over consecutive pairs."""
    worst = 0.0
    for lo, hi in zip(boundaries, boundaries[1:]):
        if lo.size == 0 or hi.size == 0:
            continue
        scale = max(1.0, opnorm(lo) * opnorm(hi))
        worst = max(worst, opnorm(lo @ hi) / scale)
    return worst


def build_koszul(T: CommutingTuple, check: bool = True) -> KoszulComplex:
    To = T.orthonormal()
    bds = koszul_boundaries(To.matrices)
    res = complex_residual(bds)
    if check and res > COMPLEX_TOL:
        raise ComplexError(f"boundary composite has relative norm {res:.3e} > {COMPLEX_TOL:g}")
    dims = tuple(To.n * comb(To.d, k) for k in range(To.d + 1))
    return KoszulComplex(To, dims, tuple(bds), res)


def homology_from_boundaries(chain_dims: Sequence[int], boundaries: Sequence[np.ndarray],
                             tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL,
                             context: str = "homology") -> HomologyReport:
    """``dim H_k = dim E_k - rank d_k - rank d_{k+1}`` with gap-certified ranks."""
    decisions = tuple(numerical_rank(B, tol, atol) for B in boundaries)
    ranks = [0] + [dec.rank for dec in decisions] + [0]
    dims = tuple(int(chain_dims[k] - ranks[k] - ranks[k + 1]) for k in range(len(chain_dims)))
    if any(x < 0 for x in dims):
        raise ComplexError(f"negative homology dimension {dims}; boundaries do not form a complex")
    msgs = warn_if_unreliable([(f"d_{k + 1}", dec) for k, dec in enumerate(decisions)], context)
    return HomologyReport(dims, tuple(int(c) for c in chain_dims), decisions, tol, tuple(msgs))


def homology_dims(K: KoszulComplex, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> HomologyReport:
    return homology_from_boundaries(K.dims, K.boundaries, tol, atol, "Koszul homology")


def dirac_matrix(chain_dims: Sequence[int], boundaries: Sequence[np.ndarray]) -> np.ndarray:
    offs = np.concatenate([[0], np.cumsum(chain_dims)]).astype(int)
    D = np.zeros((offs[-1], offs[-1]), dtype=complex)
    for k, B in enumerate(boundaries, start=1):
        rows = slice(offs[k - 1], offs[k])
        cols = slice(offs[k], offs[k + 1])
        D[rows, cols] = B
        D[cols, rows] = B.conj().T
    return D


def dirac_report(K: KoszulComplex, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> DiracReport:
    """``D = d + d^*`` on ``E_0 (+) ... (+) E_d`` and its per-grade kernel dimensions.

    ``D`` maps ``E_k`` into ``E_{k-1} (+) E_{k+1}``, so ``ker D`` splits by grade
    and the harmonic dimension at ``k`` is the nullity of the ``E_k`` column block.
    """
    D = dirac_matrix(K.dims, K.boundaries)
    offs = np.concatenate([[0], np.cumsum(K.dims)]).astype(int)
    whole = numerical_rank(D, tol, atol)
    grade_decs = []
    harmonic = []
    for k in range(len(K.dims)):
        block = D[:, offs[k]:offs[k + 1]]
        dec = numerical_rank(block, tol, atol)
        grade_decs.append(dec)
        harmonic.append(int(K.dims[k] - dec.rank))
    s = whole.singular_values
    sigma_min = float(s[-1]) if len(s) == D.shape[0] and len(s) else 0.0
    invertible = whole.rank == D.shape[0]
    sa = opnorm(D - D.conj().T)
    warn_if_unreliable([("D", whole)] + [(f"D|E_{k}", g) for k, g in enumerate(grade_decs)], "Dirac operator")
    return DiracReport(D, tuple(harmonic), sigma_min, invertible, whole, tuple(grade_decs), sa)


def fredholm_index(report: HomologyReport) -> int:
    """``sum_k (-1)^(k+1) dim H_k``."""
    return int(sum((-1) ** (k + 1) * h for k, h in enumerate(report.dims)))


def taylor_invertible(T: CommutingTuple, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> bool:
    rep = homology_dims(build_koszul(T), tol, atol)
    return all(h == 0 for h in rep.dims)


def spectrum_membership(T: CommutingTuple, lam, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> bool:
    """True when ``lam`` lies in the Taylor spectrum of ``T``."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    return not taylor_invertible(T.shifted(lam), tol, atol)


@dataclass(frozen=True)
class SpectrumPoint:
    point: tuple[complex, ...]
    member: bool
    dirac_sigma_min: float
    reliable: bool


def spectrum_point(T: CommutingTuple, lam, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> SpectrumPoint:
    """Membership together with the Dirac smallest singular value at ``lam``."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    K = build_koszul(T.shifted(lam))
    hom = homology_dims(K, tol, atol)
    dr = dirac_report(K, tol, atol)
    member = any(h != 0 for h in hom.dims)
    return SpectrumPoint(tuple(complex(x) for x in lam), member, dr.sigma_min, hom.reliable and dr.decision.reliable)


# ---------------------------------------------------------------------------
# graded pieces: strands and filtered sections


def _chain_degrees(degrees: np.ndarray, d: int, k: int) -> np.ndarray:
    return np.tile(degrees, comb(d, k))


def strand_complex(T: CommutingTuple, degrees, t: int) -> tuple[list[int], list[np.ndarray]]:
    """Strand ``t`` of a graded tuple: ``E_k`` restricted to module degree ``t - k``.

    ``degrees[a]`` is the degree of module coordinate ``a``; every ``T_i`` must
    raise degree by exactly one on the coordinates used here.
    """
    degrees = np.asarray(degrees)
    K = build_koszul(T, check=False)
    sel = [np.where(_chain_degrees(degrees, T.d, k) == t - k)[0] for k in range(T.d + 1)]
    bds = [K.boundaries[k - 1][np.ix_(sel[k - 1], sel[k])] for k in range(1, T.d + 1)]
    return [len(s) for s in sel], bds


def filtered_section(T: CommutingTuple, degrees, top: int, lam=None) -> tuple[list[int], list[np.ndarray]]:
    """Subcomplex of ``K(T - lam)`` with ``E_k`` cut to module degrees ``<= top - k``.

    For a tuple raising degree by one this is closed under the boundary, since
    ``T - lam`` sends degree ``<= top-k`` into degree ``<= top-k+1``.  At
    ``lam = 0`` it is the direct sum of strands ``0..top``.
    """
    degrees = np.asarray(degrees)
    Tl = T if lam is None else T.shifted(lam)
    K = build_koszul(Tl, check=False)
    sel = [np.where(_chain_degrees(degrees, T.d, k) <= top - k)[0] for k in range(T.d + 1)]
    bds = []
    for k in range(1, T.d + 1):
        full = K.boundaries[k - 1][:, sel[k]]
        outside = np.setdiff1d(np.arange(full.shape[0]), sel[k - 1])
        if outside.size and np.max(np.abs(full[outside]), initial=0.0) > 0:
            raise ComplexError("tuple does not respect the grading; filtered section is not a subcomplex")
        bds.append(full[sel[k - 1]])
    return [len(s) for s in sel], bds


def graded_strand_homology(T: CommutingTuple, degrees, max_strand: int, tol: float = DEFAULT_TOL,
                           atol: float = DEFAULT_ATOL) -> dict[int, HomologyReport]:
    out = {}
    for t in range(max_strand + 1):
        dims, bds = strand_complex(T, degrees, t)
        out[t] = homology_from_boundaries(dims, bds, tol, atol, f"strand {t}")
    return out


def filtered_homology(T: CommutingTuple, degrees, top: int, lam=None, tol: float = DEFAULT_TOL,
                      atol: float = DEFAULT_ATOL) -> HomologyReport:
    dims, bds = filtered_section(T, degrees, top, lam)
    if complex_residual(bds) > COMPLEX_TOL:
        raise ComplexError("filtered section does not compose to zero")
    return homology_from_boundaries(dims, bds, tol, atol, "filtered section")


def shift_strand_homology(space: DASpace, max_strand: int, tol: float = DEFAULT_TOL,
                          atol: float = DEFAULT_ATOL) -> dict[int, HomologyReport]:
    """Per-strand Koszul homology of the truncated d-shift for strands ``0..max_strand``."""
    if max_strand > space.cap:
        raise ValueError(f"strand {max_strand} exceeds the cap {space.cap}")
    if max_strand < 0:
        raise ValueError("max_strand must be >= 0")
    return graded_strand_homology(space.shift_tuple(), space.basis.degrees, max_strand, tol, atol)


def free_shift_tuple(space: DASpace, rank: int = 1) -> tuple[CommutingTuple, np.ndarray]:
    """The d-shift on ``H (x) C^rank`` (orthonormal coordinates) and coordinate degrees."""
    if rank < 1:
        raise ValueError("rank must be >= 1")
    S = space.shift_tuple()
    eye = np.eye(rank)
    mats = np.stack([np.kron(A, eye) for A in S.matrices])
    return CommutingTuple(mats), np.repeat(space.basis.degrees, rank)


@dataclass(frozen=True, eq=False)
class AugmentedReport:
    """Exactness data for ``E_1 -> E_0 -> C^rank -> 0`` with ``E_0 -> C^rank`` evaluation at 0."""

    rank: int
    kernel_dim: int          # dim ker of evaluation at 0 on degree <= N
    image_dim: int           # rank of d_1 from E_1 cut to degree <= N-1
    cokernel_dim: int        # dim E_0 - rank d_1
    subspace_residual: float  # distance between im d_1 and ker of evaluation
    surjective: bool
    strands: dict[int, HomologyReport]
    decisions: tuple[RankDecision, ...]

    @property
    def exact(self) -> bool:
        return (self.surjective and self.image_dim == self.kernel_dim and self.subspace_residual <= COMPLEX_TOL
                and all(all(h == 0 for h in rep.dims[1:]) for rep in self.strands.values()))

    @property
    def reliable(self) -> bool:
        return all(d.reliable for d in self.decisions) and all(r.reliable for r in self.strands.values())


def augmented_shift_complex(space: DASpace, mu=None, rank: int = 1, tol: float = DEFAULT_TOL,
                            atol: float = DEFAULT_ATOL) -> AugmentedReport:
    """Check ``im d_1 = ker d_{1/2} = {xi : xi(0) = 0}`` for the free module of ``rank``.

    Only the base point 0 is supported.
    """
    if mu is not None and np.any(np.asarray(mu) != 0):
        raise ValueError("the augmented shift complex is built at the base point 0 only")
    T, degrees = free_shift_tuple(space, rank)
    n = T.n
    # evaluation at 0 picks the constant coordinates
    E = np.zeros((rank, n), dtype=complex)
    E[np.arange(rank), np.arange(rank)] = 1.0
    surj = numerical_rank(E, tol, atol)
    ker, kdec = null_basis(E, tol, atol)
    dims, bds = filtered_section(T, degrees, space.cap)
    d1 = bds[0]
    img, idec = range_basis(d1, tol, atol)
    residual = subspace_distance(img, ker)
    strands = graded_strand_homology(T, degrees, space.cap, tol, atol)
    decs = (surj, kdec, idec)
    warn_if_unreliable([("evaluation", surj), ("d_1", idec)], "augmented complex")
    return AugmentedReport(
        rank=rank,
        kernel_dim=ker.shape[1],
        image_dim=idec.rank,
        cokernel_dim=n - idec.rank,
        subspace_residual=residual,
        surjective=surj.rank == rank,
        strands=strands,
        decisions=decs,
    )


# ---------------------------------------------------------------------------
# random tuples


def random_commuting_tuple(rng: np.random.Generator, n: int, d: int, max_degree: int = 3,
                           zero_eigs: int = 0, scale: float = 1.0) -> CommutingTuple:
    """``(p_1(M), ..., p_d(M))`` for a random ``n x n`` matrix ``M``.

    ``M`` is diagonalizable with ``zero_eigs`` eigenvalues forced to 0.  When
    ``zero_eigs > 0`` the polynomials have no constant term, which places the
    origin in the joint spectrum.
    """
    eigs = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.5
    eigs[:zero_eigs] = 0
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V += 2 * np.eye(n)
    M = V @ np.diag(eigs) @ np.linalg.inv(V)
    mats = []
    powers = [np.eye(n, dtype=complex)]
    for _ in range(max_degree):
        powers.append(powers[-1] @ M)
    for _ in range(d):
        c = rng.standard_normal(max_degree + 1) + 1j * rng.standard_normal(max_degree + 1)
        if zero_eigs:
            c[0] = 0
        mats.append(scale * sum(ci * P for ci, P in zip(c, powers)))
    return CommutingTuple(np.stack(mats), tol=1e-8 * max(1.0, max(opnorm(A) for A in mats) ** 2))


def scalar_point(lam) -> CommutingTuple:
    """The one-dimensional module where every ``z_i`` acts as ``lam_i``."""
    return CommutingTuple.scalar(as_point(lam, closed=True))


__all__ = [
    "KoszulComplex", "HomologyReport", "DiracReport", "AugmentedReport", "SpectrumPoint", "ComplexError",
    "build_koszul", "koszul_boundaries", "complex_residual", "homology_from_boundaries", "homology_dims",
    "dirac_matrix", "dirac_report", "fredholm_index", "taylor_invertible", "spectrum_membership",
    "spectrum_point", "strand_complex", "filtered_section", "graded_strand_homology", "filtered_homology",
    "shift_strand_homology", "free_shift_tuple", "augmented_shift_complex", "random_commuting_tuple",
    "scalar_point",
]
