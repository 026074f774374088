"""Ball automorphisms, the composition unitary and Moebius transforms of tuples.

The automorphism attached to ``lam`` is

    phi_lam(z) = (lam - P z - s Q z) / (1 - <z, lam>),

with ``P`` the orthogonal projection onto ``C lam``, ``Q = I - P`` and
``s = sqrt(1 - |lam|^2)``.  It swaps ``0`` and ``lam``, is an involution and
preserves the sphere.  A :class:`MoebiusMap` represents ``u o phi_lam`` for a
unitary ``u``.  Note that ``phi_0 = -id``; the identity map is
``MoebiusMap(0, u=-I)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg

from .basis import TruncatedSeries, geometric_inverse, substitute_many
from .dspace import (CommutingTuple, DASpace, as_point, cinner, kernel_norm_sq, kernel_vector,
                     quotient_module, row_contraction_defect)
from .rank import opnorm

UNITARY_TOL = 1e-12
DEFAULT_EXTRA = 40


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    lam: np.ndarray
    u: np.ndarray | None = None
    unitary_tol: float = UNITARY_TOL

    def __post_init__(self):
        lam = as_point(self.lam)
        object.__setattr__(self, "lam", lam)
        d = lam.shape[0]
        u = np.eye(d, dtype=complex) if self.u is None else np.asarray(self.u, dtype=complex)
        if u.shape != (d, d):
            raise ValueError(f"unitary must be {d}x{d}, got {u.shape}")
        defect = opnorm(u.conj().T @ u - np.eye(d))
        if defect > self.unitary_tol:
            raise ValueError(f"u is not unitary: ||u*u - I|| = {defect:.3e}")
        object.__setattr__(self, "u", u)

    @property
    def d(self) -> int:
        return self.lam.shape[0]

    @property
    def s(self) -> float:
        return float(np.sqrt(1.0 - np.sum(np.abs(self.lam) ** 2)))

    @property
    def base_point(self) -> np.ndarray:
        """The point sent to 0."""
        return self.lam

    def linear_part(self) -> np.ndarray:
        """``A = P + s Q``, so the numerator is ``lam - A z``."""
        lam = self.lam
        r2 = float(np.sum(np.abs(lam) ** 2))
        if r2 == 0:
            return np.eye(self.d, dtype=complex)
        P = np.outer(lam, lam.conj()) / r2
        return P + self.s * (np.eye(self.d) - P)

    @classmethod
    def identity(cls, d: int) -> MoebiusMap:
        return cls(np.zeros(d), u=-np.eye(d))

    def __call__(self, z) -> np.ndarray:
        return moebius_eval(self, z)

    def component_series(self, cap: int) -> list[TruncatedSeries]:
        """Taylor series of the coordinate functions of ``u o phi_lam`` up to ``cap``."""
        d = self.d
        A = self.linear_part()
        denom = geometric_inverse(TruncatedSeries.linear(self.lam.conj(), d, cap), cap)
        raw = [TruncatedSeries.linear(-A[i], d, cap, constant=self.lam[i]) * denom for i in range(d)]
        out = []
        for i in range(d):
            acc = TruncatedSeries(d, cap)
            for m in range(d):
                if self.u[i, m] != 0:
                    acc = acc + raw[m] * complex(self.u[i, m])
            out.append(acc)
        return out

    def kernel_series(self, cap: int) -> TruncatedSeries:
        """Series of ``k_lam / ||k_lam||``."""
        lin = TruncatedSeries.linear(self.lam.conj(), self.d, cap)
        return geometric_inverse(lin, cap) * self.s


def moebius_eval(phi: MoebiusMap, z) -> np.ndarray:
    z = as_point(z, phi.d, closed=True)
    lam = phi.lam
    num = lam - phi.linear_part() @ z
    den = 1.0 - cinner(z, lam)
    return phi.u @ (num / den)


def kernel_identity_residual(lam, z, w, u=None) -> float:
    """``|<phi(z), phi(w)> - (1 - (1-|lam|^2)(1-<z,w>) / ((1-<lam,w>)(1-<z,lam>)))|``."""
    lam = as_point(lam)
    d = lam.shape[0]
    z = as_point(z, d)
    w = as_point(w, d)
    phi = MoebiusMap(lam, u)
    lhs = cinner(moebius_eval(phi, z), moebius_eval(phi, w))
    r2 = float(np.sum(np.abs(lam) ** 2))
    rhs = 1.0 - (1.0 - r2) * (1.0 - cinner(z, w)) / ((1.0 - cinner(lam, w)) * (1.0 - cinner(z, lam)))
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# composition unitary


@dataclass(frozen=True, eq=False)
class CompositionUnitary:
    """Truncated ``U_phi xi = (xi o phi) k_lam / ||k_lam||`` in monomial coordinates.

    ``matrix`` maps coefficients over degree <= ``source_cap`` to coefficients
    over degree <= ``expansion_cap``.
    """

    map: MoebiusMap
    source_cap: int
    expansion_cap: int
    matrix: np.ndarray
    source: DASpace = field(repr=False)
    target: DASpace = field(repr=False)

    def orthonormal_matrix(self) -> np.ndarray:
        return self.target.sqrt_weights[:, None] * self.matrix / self.source.sqrt_weights[None, :]

    def apply(self, coeffs) -> np.ndarray:
        return self.matrix @ np.asarray(coeffs, dtype=complex)

    def compressed(self) -> np.ndarray:
        """Rows of degree <= source_cap (orthonormal coordinates)."""
        return self.orthonormal_matrix()[: self.source.size]


def build_composition_unitary(phi: MoebiusMap, N: int, M: int | None = None) -> CompositionUnitary:
    M = N + DEFAULT_EXTRA if M is None else int(M)
    if N < 0:
        raise ValueError("source cap must be >= 0")
    if M < N:
        raise ValueError(f"expansion cap {M} is below the source cap {N}")
    d = phi.d
    src, tgt = DASpace(d, N), DASpace(d, M)
    comps = phi.component_series(M)
    kern = phi.kernel_series(M)
    monos = [TruncatedSeries.from_terms({alpha: 1.0}, d, M) for alpha in src.basis]
    images = substitute_many(monos, comps, M)
    mat = np.stack([(img * kern).to_vector(tgt.basis) for img in images], axis=1)
    return CompositionUnitary(phi, N, M, mat, src, tgt)


def unitarity_defect(U: CompositionUnitary) -> float:
    """``||U^* U - I||`` on the source block, adjoint taken for the DA weights."""
    V = U.orthonormal_matrix()
    return opnorm(V.conj().T @ V - np.eye(V.shape[1]))


def _eval_columns(U: CompositionUnitary, point) -> np.ndarray:
    powers = np.prod(np.asarray(point, dtype=complex)[None, :] ** U.target.basis.exponent_array, axis=1)
    return powers @ U.matrix


def base_point_transport_defect(U: CompositionUnitary) -> float:
    """``max |(U xi)(lam)|`` over normalized monomials ``xi`` with ``xi(0) = 0``."""
    if U.source.size <= 1:
        return 0.0
    vals = _eval_columns(U, U.map.lam) / U.source.sqrt_weights
    return float(np.max(np.abs(vals[1:])))


def base_point_overlap(U: CompositionUnitary) -> complex:
    """``<U 1, k_lam/||k_lam||>``; tends to 1 as the expansion cap grows."""
    kv = kernel_vector(U.map.lam, U.target).coeffs * U.map.s
    col = U.matrix[:, 0]
    return complex(np.sum(U.target.weights * col * np.conj(kv)))


# ---------------------------------------------------------------------------
# the row multiplier by (phi^1, ..., phi^d)


@dataclass(frozen=True, eq=False)
class RowMoebiusReport:
    closed_form_residual: float
    operator_residual: float
    samples: int
    cap: int
    expansion_cap: int

    @property
    def ok(self) -> bool:
        return self.closed_form_residual <= 1e-12 and self.operator_residual <= 1e-6


def multiplication_compression(series: TruncatedSeries, space: DASpace) -> np.ndarray:
    """``P_N M_f P_N`` in orthonormal coordinates for a series ``f``.

    Multiplication by a power series never lowers degree, so this block only
    sees coefficients of ``f`` up to degree N and ``P_N M_f = P_N M_f P_N``.
    """
    f = series.truncate(space.cap)
    cols = []
    for alpha in space.basis:
        mono = TruncatedSeries.from_terms({alpha: 1.0}, space.d, space.cap)
        cols.append((mono * f).to_vector(space.basis))
    A = np.stack(cols, axis=1)
    D = space.sqrt_weights
    return D[:, None] * A / D[None, :]


def row_moebius_closed_forms(lam, z, w, u=None) -> tuple[complex, complex, complex]:
    """Three expressions for ``<(1 - Phi Phi^*) k_w, k_z>``.

    From the automorphism ``(1 - <phi(z),phi(w)>) / (1 - <z,w>)``, the
    closed form ``(1-|lam|^2)/((1-<lam,w>)(1-<z,lam>))`` and the kernel
    form ``<P k_w, k_z>`` with ``P`` the projection onto ``k_lam``.
    """
    lam = as_point(lam)
    phi = MoebiusMap(lam, u)
    z = as_point(z, phi.d)
    w = as_point(w, phi.d)
    r2 = float(np.sum(np.abs(lam) ** 2))
    via_phi = (1.0 - cinner(moebius_eval(phi, z), moebius_eval(phi, w))) / (1.0 - cinner(z, w))
    closed = (1.0 - r2) / ((1.0 - cinner(lam, w)) * (1.0 - cinner(z, lam)))
    # <k_w, k_lam> = k_w(lam), <k_lam, k_z> = k_lam(z)
    kernels = (1.0 / (1.0 - cinner(lam, w))) * (1.0 / (1.0 - cinner(z, lam))) / kernel_norm_sq(lam)
    return complex(via_phi), complex(closed), complex(kernels)


def row_moebius_operator_residual(phi: MoebiusMap, space: DASpace, M: int | None = None) -> float:
    """``||(1 - Phi Phi^*) - P_{k_lam}||`` on the degree <= N block."""
    M = space.cap + DEFAULT_EXTRA if M is None else int(M)
    comps = phi.component_series(max(M, space.cap))
    n = space.size
    S = np.zeros((n, n), dtype=complex)
    for f in comps:
        A = multiplication_compression(f, space)
        S += A @ A.conj().T
    v = space.to_orthonormal(kernel_vector(phi.lam, space).coeffs) * phi.s
    return opnorm(np.eye(n) - S - np.outer(v, v.conj()))


def row_moebius_check(lam, space: DASpace, samples: Iterable[tuple] = (), M: int | None = None,
                      u=None) -> RowMoebiusReport:
    phi = MoebiusMap(lam, u)
    worst = 0.0
    count = 0
    for z, w in samples:
        a, b, c = row_moebius_closed_forms(phi.lam, z, w, phi.u)
        worst = max(worst, abs(a - b), abs(b - c))
        count += 1
    M = space.cap + DEFAULT_EXTRA if M is None else int(M)
    op = row_moebius_operator_residual(phi, space, M)
    return RowMoebiusReport(worst, op, count, space.cap, M)


# ---------------------------------------------------------------------------
# Moebius transform of a tuple


class SingularDenominatorError(ValueError):
    pass


def apply_moebius_to_tuple(T: CommutingTuple, phi: MoebiusMap, contraction_tol: float = 1e-8) -> CommutingTuple:
    """``(phi^1(T), ..., phi^d(T))`` by the rational functional calculus."""
    if T.d != phi.d:
        raise ValueError(f"tuple has d={T.d} but the map has d={phi.d}")
    To = T.orthonormal()
    if To.n == 0:
        return To
    defect = row_contraction_defect(To)
    if defect > contraction_tol:
        raise ValueError(f"tuple is not a row contraction (defect {defect:.3e})")
    eye = np.eye(To.n, dtype=complex)
    den = eye - np.einsum("k,kab->ab", phi.lam.conj(), To.matrices)
    smin = linalg.svdvals(den)[-1]
    if smin <= 1e-12 * max(1.0, opnorm(den)):
        raise SingularDenominatorError(f"I - sum conj(lam_k) T_k is singular (sigma_min = {smin:.3e})")
    inv = linalg.inv(den)
    A = phi.linear_part()
    raw = [(phi.lam[i] * eye - np.einsum("j,jab->ab", A[i], To.matrices)) @ inv for i in range(phi.d)]
    mats = np.einsum("im,mab->iab", phi.u, np.stack(raw))
    scale = max(1.0, float(np.max([opnorm(X) for X in mats])))
    return CommutingTuple(mats, tol=max(To.tol, 1e-10 * scale * scale))


def moebius_factor_residual(T: CommutingTuple, phi: MoebiusMap) -> float:
    """``max_i ||phi(T)_i - (-(u A (T - lam)) D^-1)_i||`` with ``D = I - sum conj(lam_k) T_k``.

    The factorization shows that ``phi(T)`` and ``T - lam`` generate the same
    Koszul homology.
    """
    To = T.orthonormal()
    eye = np.eye(To.n, dtype=complex)
    inv = linalg.inv(eye - np.einsum("k,kab->ab", phi.lam.conj(), To.matrices))
    B = phi.u @ phi.linear_part()
    shifted = To.matrices - phi.lam[:, None, None] * eye[None]
    fact = -np.einsum("ij,jab->iab", B, shifted) @ inv
    got = apply_moebius_to_tuple(To, phi).matrices
    return float(max(opnorm(a - b) for a, b in zip(got, fact)))


# ---------------------------------------------------------------------------
# ergodicity


@dataclass(frozen=True)
class ErgodicityReport:
    found: bool
    point: tuple[complex, ...] | None
    vector_index: int | None
    defect: float
    points_scanned: int
    max_defects: tuple[float, ...]
    threshold: float


def ergodicity_scan(space: DASpace, generators, grid: Sequence, M: int | None = None,
                    threshold: float = 0.01) -> ErgodicityReport:
    """Search ``grid`` for ``lam`` and a submodule basis vector ``xi`` leaving the submodule.

    The defect is ``dist(P_N U_phi xi, M) / ||xi||`` with ``phi = phi_lam`` and
    distances taken in the DA norm.
    """
    q = quotient_module(space, generators)
    sub = space.to_orthonormal(q.submodule_basis)
    k = sub.shape[1]
    if k == 0 or k == space.size:
        raise ValueError("the submodule must be proper and nontrivial at this truncation")
    maxima = []
    for idx, lam in enumerate(grid):
        phi = MoebiusMap(lam)
        U = build_composition_unitary(phi, space.cap, M)
        C = U.compressed()
        images = C @ sub  # sub columns are unit vectors
        resid = images - sub @ (sub.conj().T @ images)
        defects = np.linalg.norm(resid, axis=0)
        j = int(np.argmax(defects))
        maxima.append(float(defects[j]))
        if defects[j] > threshold:
            return ErgodicityReport(True, tuple(complex(x) for x in phi.lam), j, float(defects[j]), idx + 1,
                                    tuple(maxima), threshold)
    return ErgodicityReport(False, None, None, max(maxima, default=0.0), len(maxima), tuple(maxima), threshold)


__all__ = [
    "MoebiusMap", "CompositionUnitary", "RowMoebiusReport", "ErgodicityReport", "SingularDenominatorError",
    "moebius_eval", "kernel_identity_residual", "build_composition_unitary", "unitarity_defect",
    "base_point_transport_defect", "base_point_overlap", "multiplication_compression",
    "row_moebius_closed_forms", "row_moebius_operator_residual", "row_moebius_check",
    "apply_moebius_to_tuple", "moebius_factor_residual", "ergodicity_scan",
]
