"""Truncated Drury-Arveson space and commuting operator tuples.

Elements of the space are polynomials of degree <= cap stored as coefficient
vectors over :class:`~hilmod.basis.GradedBasis`.  The inner product is diagonal
in the monomial basis with ``||z^alpha||^2 = alpha!/|alpha|!``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg

from .basis import GradedBasis, MultiIndex, TruncatedSeries, enumerate_basis
from .rank import DEFAULT_ATOL, DEFAULT_TOL, null_basis, opnorm, range_basis

COMMUTE_TOL = 1e-10


class NonCommutingError(ValueError):
    def __init__(self, pair: tuple[int, int], residual: float, tol: float):
        self.pair = pair
        self.residual = residual
        super().__init__(
            f"T{pair[0] + 1} and T{pair[1] + 1} do not commute: "
            f"||[T_i, T_j]|| = {residual:.3e} > {tol:.1e} (0-based pair {pair})"
        )


def as_point(lam, d: int | None = None, closed: bool = False) -> np.ndarray:
    """Validate a point of the unit ball (open unless ``closed``)."""
    z = np.atleast_1d(np.asarray(lam, dtype=complex)).reshape(-1)
    if d is not None and z.shape[0] != d:
        raise ValueError(f"point has {z.shape[0]} coordinates, expected {d}")
    r = float(np.linalg.norm(z))
    if closed:
        if r > 1 + 1e-12:
            raise ValueError(f"point {z} lies outside the closed unit ball (|z| = {r:.6g})")
    elif r >= 1:
        raise ValueError(f"point {z} is not in the open unit ball (|z| = {r:.6g})")
    return z


def cinner(a, b) -> complex:
    """``<a, b> = sum a_i conj(b_i)`` on C^d."""
    return complex(np.vdot(np.asarray(b, dtype=complex), np.asarray(a, dtype=complex)))


class DASpace:
    """Polynomials of degree <= cap in the Drury-Arveson norm."""

    def __init__(self, d: int, cap: int):
        self.basis: GradedBasis = enumerate_basis(d, cap)
        self.d = self.basis.d
        self.cap = self.basis.cap
        self.weights = np.array([1.0 / m.multinomial() for m in self.basis])
        self.sqrt_weights = np.sqrt(self.weights)

    @property
    def size(self) -> int:
        return len(self.basis)

    def __repr__(self):
        return f"DASpace(d={self.d}, cap={self.cap})"

    def __eq__(self, other):
        return isinstance(other, DASpace) and (self.d, self.cap) == (other.d, other.cap)

    def __hash__(self):
        return hash((DASpace, self.d, self.cap))

    def vector(self, coeffs) -> DAVector:
        return DAVector(self, np.asarray(coeffs, dtype=complex))

    def zero(self) -> DAVector:
        return DAVector(self, np.zeros(self.size, dtype=complex))

    def monomial(self, alpha, coeff=1.0) -> DAVector:
        v = np.zeros(self.size, dtype=complex)
        v[self.basis.index_of(alpha)] = coeff
        return DAVector(self, v)

    def polynomial(self, terms: dict) -> DAVector:
        """``{exponent tuple: coefficient}`` -> vector; raises if a term exceeds the cap."""
        v = np.zeros(self.size, dtype=complex)
        for alpha, c in terms.items():
            v[self.basis.index_of(alpha)] += c
        return DAVector(self, v)

    def from_series(self, s: TruncatedSeries) -> DAVector:
        return DAVector(self, s.to_vector(self.basis))

    def to_orthonormal(self, coeffs: np.ndarray) -> np.ndarray:
        """Monomial coefficients -> coordinates in the orthonormal basis ``z^a/||z^a||``."""
        return self.sqrt_weights.reshape((-1,) + (1,) * (np.ndim(coeffs) - 1)) * coeffs

    def from_orthonormal(self, coords: np.ndarray) -> np.ndarray:
        return coords / self.sqrt_weights.reshape((-1,) + (1,) * (np.ndim(coords) - 1))

    def shift_tuple(self, orthonormal: bool = True) -> CommutingTuple:
        """The truncated d-shift (overflow beyond the cap dropped)."""
        mats = np.stack([shift_matrix(i, self).matrix for i in range(self.d)])
        if orthonormal:
            D = self.sqrt_weights
            mats = D[None, :, None] * mats / D[None, None, :]
            return CommutingTuple(mats)
        return CommutingTuple(mats, weights=self.weights)


@dataclass(frozen=True, eq=False)
class DAVector:
    space: DASpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.space.size,):
            raise ValueError(f"coefficient vector has shape {c.shape}, expected ({self.space.size},)")
        object.__setattr__(self, "coeffs", c)

    def _same(self, other: DAVector):
        if not isinstance(other, DAVector) or other.space != self.space:
            raise ValueError("vectors live in different spaces")

    def __add__(self, other):
        self._same(other)
        return DAVector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return DAVector(self.space, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return DAVector(self.space, self.coeffs * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(max(da_inner(self, self).real, 0.0)))

    def series(self) -> TruncatedSeries:
        return TruncatedSeries.from_vector(self.space.basis, self.coeffs)

    def __call__(self, lam) -> complex:
        return evaluate(self, lam)


def da_inner(xi: DAVector, eta: DAVector) -> complex:
    xi._same(eta)
    return complex(np.sum(xi.space.weights * xi.coeffs * np.conj(eta.coeffs)))


def kernel_vector(lam, space: DASpace) -> DAVector:
    """Truncation of ``k_lam(z) = 1/(1 - <z, lam>)``."""
    lam = as_point(lam, space.d)
    powers = np.prod(np.conj(lam)[None, :] ** space.basis.exponent_array, axis=1)
    return DAVector(space, powers / space.weights)


def kernel_norm_sq(lam) -> float:
    """``||k_lam||^2 = 1/(1 - |lam|^2)`` in the full space."""
    r2 = float(np.sum(np.abs(np.asarray(lam, dtype=complex)) ** 2))
    return 1.0 / (1.0 - r2)


def evaluate(xi: DAVector, lam) -> complex:
    """Polynomial value of ``xi`` at a point of the open ball."""
    lam = as_point(lam, xi.space.d)
    powers = np.prod(lam[None, :] ** xi.space.basis.exponent_array, axis=1)
    return complex(np.sum(xi.coeffs * powers))


class ShiftMatrix(NamedTuple):
    matrix: np.ndarray
    overflow: np.ndarray  # per source monomial: True when z_i z^alpha exceeds the target cap


def shift_matrix(i: int, space: DASpace, target: DASpace | None = None) -> ShiftMatrix:
    """Matrix of multiplication by ``z_i`` in monomial coordinates.

    With ``target`` of larger cap this is the expanded-target variant and nothing
    overflows.
    """
    target = space if target is None else target
    if not 0 <= i < space.d:
        raise IndexError(f"variable index {i} out of range for d={space.d}")
    if target.d != space.d:
        raise ValueError("source and target dimension differ")
    M = np.zeros((target.size, space.size))
    overflow = np.zeros(space.size, dtype=bool)
    for col, alpha in enumerate(space.basis):
        e = list(alpha.exponents)
        e[i] += 1
        if target.basis.contains(e):
            M[target.basis.index_of(e), col] = 1.0
        else:
            overflow[col] = True
    return ShiftMatrix(M, overflow)


def weighted_adjoint(A, space: DASpace, target: DASpace | None = None) -> np.ndarray:
    """Adjoint of ``A: space -> target`` for the DA inner products: ``W_s^-1 A^H W_t``."""
    target = space if target is None else target
    A = np.asarray(A)
    return (A.conj().T * target.weights[None, :]) / space.weights[:, None]


# ---------------------------------------------------------------------------
# commuting tuples


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """``d`` commuting ``n x n`` matrices.

    ``weights`` (optional, positive) describes a diagonal Gram matrix for the
    ambient inner product; without it the coordinates are orthonormal.
    """

    matrices: np.ndarray
    weights: np.ndarray | None = None
    tol: float = COMMUTE_TOL
    commutator_residual: float = field(init=False)
    worst_pair: tuple[int, int] | None = field(init=False)

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected an array of shape (d, n, n), got {mats.shape}")
        if mats.shape[0] < 1:
            raise ValueError("a tuple needs d >= 1")
        object.__setattr__(self, "matrices", mats)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (mats.shape[1],) or np.any(w <= 0):
                raise ValueError("weights must be positive with one entry per coordinate")
            object.__setattr__(self, "weights", w)
        res, pair = 0.0, None
        d = mats.shape[0]
        for i in range(d):
            for j in range(i + 1, d):
                r = opnorm(mats[i] @ mats[j] - mats[j] @ mats[i])
                if pair is None or r > res:
                    res, pair = r, (i, j)
        object.__setattr__(self, "commutator_residual", res)
        object.__setattr__(self, "worst_pair", pair)
        if res > self.tol:
            raise NonCommutingError(pair, res, self.tol)

    @property
    def d(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self.matrices[i]

    def orthonormal(self) -> CommutingTuple:
        """Same operators written in orthonormal coordinates."""
        if self.weights is None:
            return self
        D = np.sqrt(self.weights)
        mats = D[None, :, None] * self.matrices / D[None, None, :]
        return CommutingTuple(mats, tol=self.tol)

    def adjoint(self, i: int) -> np.ndarray:
        A = self.matrices[i]
        if self.weights is None:
            return A.conj().T
        return (A.conj().T * self.weights[None, :]) / self.weights[:, None]

    def shifted(self, lam) -> CommutingTuple:
        """``(T_1 - lam_1, ..., T_d - lam_d)``."""
        lam = np.asarray(lam, dtype=complex).reshape(-1)
        if lam.shape != (self.d,):
            raise ValueError(f"point must have {self.d} coordinates")
        eye = np.eye(self.n)
        return CommutingTuple(self.matrices - lam[:, None, None] * eye[None], self.weights, self.tol)

    @classmethod
    def scalar(cls, lam) -> CommutingTuple:
        """The one-dimensional module C_lam (each z_i acts as lam_i)."""
        lam = np.asarray(lam, dtype=complex).reshape(-1)
        return cls(lam[:, None, None])

    @classmethod
    def zero(cls, d: int, n: int = 1) -> CommutingTuple:
        return cls(np.zeros((d, n, n), dtype=complex))


def row_contraction_defect(T: CommutingTuple) -> float:
    """``max(0, lambda_max(sum T_i T_i^*) - 1)``; zero for a row contraction."""
    if T.n == 0:
        return 0.0
    To = T.orthonormal()
    S = sum(A @ A.conj().T for A in To.matrices)
    top = float(np.max(linalg.eigvalsh((S + S.conj().T) / 2)))
    return max(0.0, top - 1.0)


def purity_defect(T: CommutingTuple, n: int) -> float:
    """Operator norm of ``Sigma^n(I)`` with ``Sigma(X) = sum_i T_i X T_i^*``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if T.n == 0:
        return 0.0
    To = T.orthonormal()
    X = np.eye(T.n, dtype=complex)
    for _ in range(n):
        X = sum(A @ X @ A.conj().T for A in To.matrices)
    return opnorm(X)


def purity_profile(T: CommutingTuple, n_max: int) -> list[float]:
    """``[purity_defect(T, n) for n in 0..n_max]`` computed incrementally."""
    if T.n == 0:
        return [0.0] * (n_max + 1)
    To = T.orthonormal()
    X = np.eye(T.n, dtype=complex)
    out = [opnorm(X)]
    for _ in range(n_max):
        X = sum(A @ X @ A.conj().T for A in To.matrices)
        out.append(opnorm(X))
    return out


# ---------------------------------------------------------------------------
# quotient modules


@dataclass(frozen=True, eq=False)
class QuotientModule:
    """Compression of the truncated d-shift to the complement of a submodule.

    ``basis`` holds DA-orthonormal complement vectors as monomial-coefficient
    columns; ``tuple`` is the compressed tuple in those (orthonormal)
    coordinates.  ``degrees`` is set when the generators are homogeneous, in
    which case every basis vector is homogeneous and ``T_i`` raises degree by
    exactly one.
    """

    parent: DASpace
    generators: tuple[DAVector, ...]
    basis: np.ndarray
    tuple: CommutingTuple
    degrees: np.ndarray | None
    submodule_basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def graded(self) -> bool:
        return self.degrees is not None

    @property
    def is_finite(self) -> bool:
        """True when the truncation loses nothing: no complement vector sits at the cap.

        For homogeneous generators this means the submodule contains every
        monomial of degree cap, hence everything above it.
        """
        return self.graded and not np.any(self.degrees == self.parent.cap)

    def complement_vectors(self) -> list[DAVector]:
        return [DAVector(self.parent, self.basis[:, j]) for j in range(self.dim)]


def _is_homogeneous(v: DAVector) -> int | None:
    degs = v.space.basis.degrees[np.abs(v.coeffs) > 0]
    if len(degs) == 0:
        return None
    return int(degs[0]) if np.all(degs == degs[0]) else None


def submodule_span(space: DASpace, generators: Sequence[DAVector]) -> np.ndarray:
    """Columns ``P_N(z^beta g)``: the degree <= N truncations spanning ``P_N M``.

    ``beta`` runs over every monomial whose product with the lowest-degree part
    of ``g`` stays under the cap.  The orthogonal complement of this span in
    the truncated space is ``(H - M)`` intersected with degree <= N, which is
    invariant under every ``S_i^*``; hence the compressed tuple commutes even
    for non-homogeneous generators.
    """
    cols = []
    for g in generators:
        nz = space.basis.degrees[np.abs(g.coeffs) > 0]
        if len(nz) == 0:
            raise ValueError("generators must be nonzero")
        low = int(nz.min())
        gs = g.series()
        for beta in space.basis:
            if beta.degree + low > space.cap:
                break
            mono = TruncatedSeries.from_terms({beta: 1.0}, space.d, space.cap)
            cols.append((mono * gs).to_vector(space.basis))
    return np.array(cols, dtype=complex).T.reshape(space.size, len(cols))


def quotient_module(space: DASpace, generators: Sequence[DAVector], tol: float = DEFAULT_TOL,
                    atol: float = DEFAULT_ATOL) -> QuotientModule:
    """``H (-) M`` for ``M`` the truncated submodule generated by ``generators``."""
    gens = tuple(generators)
    if not gens:
        raise ValueError("quotient_module needs at least one generator")
    for g in gens:
        if g.space != space:
            raise ValueError("generator lives in a different space")
    span = submodule_span(space, gens)
    ortho = space.to_orthonormal(span)
    homog = [_is_homogeneous(g) for g in gens]
    n = space.size
    if all(h is not None for h in homog):
        blocks_c, blocks_m, degs = [], [], []
        for s in range(space.cap + 1):
            sl = space.basis.block(s)
            rows = np.zeros(n, dtype=bool)
            rows[sl] = True
            # columns living in degree s
            cols = np.where(np.any(np.abs(ortho[rows]) > 0, axis=0) & ~np.any(np.abs(ortho[~rows]) > 0, axis=0))[0]
            local = ortho[sl][:, cols]
            Q, _ = range_basis(local, tol, atol) if local.size else (np.zeros((sl.stop - sl.start, 0)), None)
            C, _ = null_basis(Q.conj().T, tol, atol) if Q.shape[1] else (np.eye(sl.stop - sl.start), None)
            for block, out in ((Q, blocks_m), (C, blocks_c)):
                full = np.zeros((n, block.shape[1]), dtype=complex)
                full[sl] = block
                out.append(full)
            degs.extend([s] * C.shape[1])
        comp = np.hstack(blocks_c) if blocks_c else np.zeros((n, 0))
        sub = np.hstack(blocks_m) if blocks_m else np.zeros((n, 0))
        degrees = np.array(degs, dtype=int)
    else:
        sub, _ = range_basis(ortho, tol, atol)
        comp, _ = null_basis(sub.conj().T, tol, atol) if sub.shape[1] else (np.eye(n, dtype=complex), None)
        degrees = None
    S = space.shift_tuple(orthonormal=True)
    mats = np.stack([comp.conj().T @ A @ comp for A in S.matrices]) if comp.shape[1] else np.zeros((space.d, 0, 0))
    tup = CommutingTuple(mats)
    return QuotientModule(
        parent=space,
        generators=gens,
        basis=space.from_orthonormal(comp),
        tuple=tup,
        degrees=degrees,
        submodule_basis=space.from_orthonormal(sub),
    )


def monomial_generators(space: DASpace, exponents: Sequence[Sequence[int]]) -> list[DAVector]:
    return [space.monomial(tuple(e)) for e in exponents]


def submodule_projector(space: DASpace, span: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal-coordinate basis of the span of monomial-coefficient columns."""
    Q, _ = range_basis(space.to_orthonormal(span), tol)
    return Q


__all__ = [
    "DASpace", "DAVector", "CommutingTuple", "QuotientModule", "NonCommutingError", "ShiftMatrix",
    "as_point", "cinner", "da_inner", "kernel_vector", "kernel_norm_sq", "evaluate", "shift_matrix",
    "weighted_adjoint", "row_contraction_defect", "purity_defect", "purity_profile", "quotient_module",
    "monomial_generators", "submodule_span", "submodule_projector", "MultiIndex",
]
