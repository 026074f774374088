"""Multiplier matrices, free resolutions, localization and the homology comparisons.

A :class:`MultiplierMatrix` is a ``tgt_rank x src_rank`` matrix of polynomials
acting on ``H (x) C^src_rank``.  Operators on free modules use the layout
``c * size + a`` (component-major, ``a`` indexing the graded basis) in the
orthonormal monomial coordinates.

Resolutions are built algebraically (Koszul, Taylor) and checked numerically;
the partial-isometric normalization of abstract resolutions is not reproduced.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import MultiIndex, TruncatedSeries, enumerate_basis, wedge_basis
from .dspace import CommutingTuple, DASpace, DAVector, QuotientModule, as_point, kernel_vector
from .koszul import (build_koszul, filtered_homology, homology_dims, HomologyReport)
from .moebius import MoebiusMap, apply_moebius_to_tuple, moebius_factor_residual
from .rank import (DEFAULT_ATOL, DEFAULT_TOL, RankDecision, UnreliableRankError, numerical_rank, opnorm,
                   warn_if_unreliable)

COMPOSITE_TOL = 1e-12
TRUNCATION_LABEL = "exactness verified at truncation scale"
NORMALIZATION_NOTE = "algebraic resolution; partial-isometric normalization not reproduced"


@dataclass(frozen=True, eq=False)
class MultiplierMatrix:
    """Polynomial matrix; ``entries[r][c]`` multiplies component ``c`` into component ``r``."""

    d: int
    entries: tuple[tuple[TruncatedSeries, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("a multiplier matrix needs at least one row and one column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged multiplier matrix")
        cap = max(e.cap for r in rows for e in r)
        for r in rows:
            for e in r:
                if e.d != self.d:
                    raise ValueError(f"entry has d={e.d}, expected {self.d}")
        rows = tuple(tuple(e if e.cap == cap else e.truncate(cap) for e in r) for r in rows)
        object.__setattr__(self, "entries", rows)

    @property
    def tgt_rank(self) -> int:
        return len(self.entries)

    @property
    def src_rank(self) -> int:
        return len(self.entries[0])

    @property
    def cap(self) -> int:
        return self.entries[0][0].cap

    @property
    def degree(self) -> int:
        return max((e.degree() for r in self.entries for e in r), default=-1)

    def entry(self, r: int, c: int) -> TruncatedSeries:
        return self.entries[r][c]

    @classmethod
    def from_terms(cls, rows: Sequence[Sequence[dict]], d: int, cap: int | None = None) -> MultiplierMatrix:
        """Entries given as ``{exponent tuple: coefficient}`` dictionaries."""
        if cap is None:
            cap = max((sum(a) for row in rows for t in row for a in t), default=0)
        return cls(d, tuple(tuple(TruncatedSeries.from_terms(t, d, cap) for t in row) for row in rows))

    @classmethod
    def constant(cls, matrix, d: int) -> MultiplierMatrix:
        A = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls(d, tuple(tuple(TruncatedSeries.constant(v, d, 0) for v in row) for row in A))

    def with_cap(self, cap: int) -> MultiplierMatrix:
        return MultiplierMatrix(self.d, tuple(tuple(e.truncate(cap) for e in r) for r in self.entries))

    def terms(self, r: int, c: int) -> dict[MultiIndex, complex]:
        return self.entries[r][c].coefficients

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(e.data), initial=0.0)) for r in self.entries for e in r)


def compose(phi: MultiplierMatrix, psi: MultiplierMatrix) -> MultiplierMatrix:
    """Polynomial matrix product ``phi * psi`` (``psi`` acts first); computed without truncation loss."""
    if phi.src_rank != psi.tgt_rank:
        raise ValueError(f"cannot compose: {phi.src_rank} columns vs {psi.tgt_rank} rows")
    if phi.d != psi.d:
        raise ValueError("dimension mismatch")
    cap = max(phi.degree, 0) + max(psi.degree, 0)
    A, B = phi.with_cap(cap), psi.with_cap(cap)
    rows = []
    for r in range(A.tgt_rank):
        row = []
        for c in range(B.src_rank):
            acc = TruncatedSeries(A.d, cap)
            for m in range(A.src_rank):
                acc = acc + A.entries[r][m] * B.entries[m][c]
            row.append(acc)
        rows.append(tuple(row))
    return MultiplierMatrix(A.d, tuple(rows))


def localize(phi: MultiplierMatrix, lam) -> np.ndarray:
    """Entrywise evaluation ``Phi(lam)``."""
    lam = as_point(lam, phi.d)
    return np.array([[e(lam) for e in row] for row in phi.entries], dtype=complex)


def apply_multiplier(phi: MultiplierMatrix, xi: Sequence[DAVector], strict: bool = True) -> list[DAVector]:
    """``(Phi xi)_r = sum_c Phi_rc xi_c`` in the space of the inputs.

    With ``strict`` a product reaching past the cap raises instead of being
    truncated.
    """
    xi = list(xi)
    if len(xi) != phi.src_rank:
        raise ValueError(f"multiplier expects {phi.src_rank} components, got {len(xi)}")
    space = xi[0].space
    for v in xi:
        if v.space != space:
            raise ValueError("components live in different spaces")
    if phi.d != space.d:
        raise ValueError("dimension mismatch between multiplier and space")
    cap = space.cap
    out = []
    for r in range(phi.tgt_rank):
        acc = TruncatedSeries(space.d, cap)
        for c in range(phi.src_rank):
            e, s = phi.entries[r][c], xi[c].series()
            if strict and e.degree() >= 0 and s.degree() >= 0 and e.degree() + s.degree() > cap:
                raise ValueError(f"entry ({r},{c}) times component {c} has degree "
                                 f"{e.degree() + s.degree()} > cap {cap}")
            acc = acc + e.truncate(cap) * s
        out.append(space.from_series(acc))
    return out


def multiplier_operator(phi: MultiplierMatrix, src: DASpace, tgt: DASpace | None = None) -> np.ndarray:
    """Matrix of ``Phi`` from ``src (x) C^src_rank`` to ``tgt (x) C^tgt_rank``, orthonormal coordinates.

    Terms landing above ``tgt.cap`` are dropped; the default target cap
    ``src.cap + deg Phi`` drops nothing.
    """
    if tgt is None:
        tgt = DASpace(src.d, src.cap + max(phi.degree, 0))
    ns, nt = src.size, tgt.size
    out = np.zeros((nt * phi.tgt_rank, ns * phi.src_rank), dtype=complex)
    tb = tgt.basis
    for r in range(phi.tgt_rank):
        for c in range(phi.src_rank):
            terms = phi.terms(r, c)
            if not terms:
                continue
            block = np.zeros((nt, ns), dtype=complex)
            for beta, coef in terms.items():
                for col, alpha in enumerate(src.basis):
                    key = tuple(a + b for a, b in zip(alpha.exponents, beta.exponents))
                    if tb.contains(key):
                        block[tb.index_of(key), col] += coef
            out[r * nt:(r + 1) * nt, c * ns:(c + 1) * ns] = block
    Ws = np.tile(src.sqrt_weights, phi.src_rank)
    Wt = np.tile(tgt.sqrt_weights, phi.tgt_rank)
    return Wt[:, None] * out / Ws[None, :]


# ---------------------------------------------------------------------------
# kernel identities for multipliers


def adjoint_tail_bound(phi: MultiplierMatrix, lam, space: DASpace, M: int) -> float:
    """Bound ``||Phi P_N|| |lam|^(M+1) / sqrt(1-|lam|^2)`` for unit ``eta``."""
    lam = as_point(lam, phi.d)
    r = float(np.linalg.norm(lam))
    return opnorm(multiplier_operator(phi, space)) * r ** (M + 1) / math.sqrt(1 - r * r)


def adjoint_kernel_residual(phi: MultiplierMatrix, lam, eta, space: DASpace, M: int | None = None) -> float:
    """``||P_N Phi^*(k_lam (x) eta) - P_N k_lam (x) Phi(lam)^* eta||`` in the DA norm.

    ``k_lam`` is truncated at degree ``M`` (default ``N + deg Phi``, where the
    identity holds exactly); smaller ``M`` is covered by :func:`adjoint_tail_bound`.
    """
    lam = as_point(lam, phi.d)
    eta = np.asarray(eta, dtype=complex).reshape(-1)
    if eta.shape != (phi.tgt_rank,):
        raise ValueError(f"eta must have {phi.tgt_rank} entries")
    M = space.cap + max(phi.degree, 0) if M is None else int(M)
    tgt = DASpace(space.d, M)
    A = multiplier_operator(phi, space, tgt)
    k_t = tgt.to_orthonormal(kernel_vector(lam, tgt).coeffs)
    lhs = A.conj().T @ np.kron(eta, k_t)
    k_s = space.to_orthonormal(kernel_vector(lam, space).coeffs)
    rhs = np.kron(localize(phi, lam).conj().T @ eta, k_s)
    return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True)
class NormBoundReport:
    operator_norm: float          # ||Phi P_N||
    max_local_norm: float         # max over samples of ||Phi(lam)||
    worst_ratio: float            # max ||Phi(lam)|| / bound(lam)
    samples: int
    ok: bool


def multiplier_norm_bound_check(phi: MultiplierMatrix, samples: Sequence, space: DASpace) -> NormBoundReport:
    """Check ``||Phi(lam)|| <= ||Phi P_N|| / sqrt(1 - |lam|^(2(N+1)))`` on every sample.

    This is the truncated form of ``||Phi(lam)|| <= ||Phi||``: it follows from
    the kernel identity applied to ``P_N k_lam``.
    """
    opn = opnorm(multiplier_operator(phi, space))
    worst, top = 0.0, 0.0
    count = 0
    for lam in samples:
        lam = as_point(lam, phi.d)
        r2 = float(np.sum(np.abs(lam) ** 2))
        bound = opn / math.sqrt(1 - r2 ** (space.cap + 1))
        loc = opnorm(localize(phi, lam))
        top = max(top, loc)
        worst = max(worst, loc / bound if bound > 0 else (0.0 if loc == 0 else math.inf))
        count += 1
    return NormBoundReport(opn, top, worst, count, worst <= 1 + 1e-12)


# ---------------------------------------------------------------------------
# resolutions


@dataclass(frozen=True, eq=False)
class ResolutionSpec:
    """``0 <- C_0 <-Phi_1- C_1 <-Phi_2- ...`` with ``ranks[k] = dim C_k``.

    ``shifts[k]`` holds generator degrees of ``C_k`` when every map is
    homogeneous of degree 0 for them; ``None`` for non-graded resolutions.
    """

    d: int
    ranks: tuple[int, ...]
    maps: tuple[MultiplierMatrix, ...]
    target: dict
    shifts: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) != len(ranks) - 1:
            raise ValueError(f"{len(ranks)} ranks need {len(ranks) - 1} maps, got {len(maps)}")
        for k, phi in enumerate(maps, start=1):
            if phi.d != self.d:
                raise ValueError(f"map {k} has d={phi.d}, expected {self.d}")
            if (phi.tgt_rank, phi.src_rank) != (ranks[k - 1], ranks[k]):
                raise ValueError(f"map {k} is {phi.tgt_rank}x{phi.src_rank}, expected {ranks[k - 1]}x{ranks[k]}")
        if self.shifts is not None:
            shifts = tuple(tuple(int(x) for x in s) for s in self.shifts)
            if [len(s) for s in shifts] != list(ranks):
                raise ValueError("shifts must list one degree per generator at every level")
            object.__setattr__(self, "shifts", shifts)

    @property
    def length(self) -> int:
        return len(self.maps)

    @property
    def graded(self) -> bool:
        return self.shifts is not None

    def map(self, k: int) -> MultiplierMatrix:
        return self.maps[k - 1]


def koszul_resolution_of_point(mu, d: int, cap: int | None = None) -> ResolutionSpec:
    """Koszul resolution of the one-dimensional module at ``mu`` by ``z_i - mu_i``."""
    mu = as_point(np.zeros(d) if mu is None else mu, d)
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1 for linear entries")
    maps = []
    for k in range(1, d + 1):
        rows = {w.indices: r for r, w in enumerate(wedge_basis(d, k - 1))}
        cols = wedge_basis(d, k)
        ent = [[{} for _ in cols] for _ in rows]
        for c, S in enumerate(cols):
            for j, i in enumerate(S.indices):
                sign = (-1) ** j
                e = [0] * d
                e[i - 1] = 1
                t = ent[rows[S.remove(j).indices]][c]
                t[tuple(e)] = t.get(tuple(e), 0) + sign
                if mu[i - 1] != 0:
                    t[(0,) * d] = t.get((0,) * d, 0) - sign * mu[i - 1]
        maps.append(MultiplierMatrix.from_terms(ent, d, 1))
    ranks = tuple(math.comb(d, k) for k in range(d + 1))
    shifts = tuple((k,) * ranks[k] for k in range(d + 1)) if np.all(mu == 0) else None
    target = {"kind": "point", "point": [complex(x) for x in mu]}
    return ResolutionSpec(d, ranks, tuple(maps), target, shifts)


def _lcm(monos: Sequence[tuple[int, ...]], d: int) -> tuple[int, ...]:
    if not monos:
        return (0,) * d
    return tuple(max(m[i] for m in monos) for i in range(d))


def taylor_resolution_monomial(generators: Sequence[Sequence[int]], d: int, cap: int | None = None) -> ResolutionSpec:
    """Taylor complex of the monomial ideal with the given exponent vectors."""
    gens = [tuple(int(x) for x in g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    for g in gens:
        if len(g) != d:
            raise ValueError(f"generator {g} does not have {d} exponents")
        if sum(g) == 0:
            raise ValueError("generators must be nonconstant monomials")
        if any(x < 0 for x in g):
            raise ValueError(f"negative exponent in {g}")
    r = len(gens)
    top = _lcm(gens, d)
    if cap is not None and sum(top) > cap:
        raise ValueError(f"lcm of all generators has degree {sum(top)} > cap {cap}")
    subsets = [list(itertools.combinations(range(r), k)) for k in range(r + 1)]
    lcms = [[_lcm([gens[i] for i in S], d) for S in level] for level in subsets]
    maps = []
    for k in range(1, r + 1):
        rows = {S: i for i, S in enumerate(subsets[k - 1])}
        ent = [[{} for _ in subsets[k]] for _ in subsets[k - 1]]
        for c, S in enumerate(subsets[k]):
            for j in range(k):
                T = S[:j] + S[j + 1:]
                ratio = tuple(a - b for a, b in zip(lcms[k][c], lcms[k - 1][rows[T]]))
                ent[rows[T]][c][ratio] = (-1) ** j
        maps.append(MultiplierMatrix.from_terms(ent, d, max(1, sum(top))))
    ranks = tuple(len(level) for level in subsets)
    shifts = tuple(tuple(sum(m) for m in level) for level in lcms)
    target = {"kind": "monomial-quotient", "generators": [list(g) for g in gens]}
    return ResolutionSpec(d, ranks, tuple(maps), target, shifts)


def principal_resolution(terms: dict, d: int) -> ResolutionSpec:
    """``0 -> H -[p]-> H`` for a nonzero polynomial ``p``."""
    phi = MultiplierMatrix.from_terms([[terms]], d)
    degs = {sum(a) for a, c in terms.items() if c != 0}
    shifts = ((0,), (degs.pop(),)) if len(degs) == 1 else None
    return ResolutionSpec(d, (1, 1), (phi,), {"kind": "quotient", "generators": [terms]}, shifts)


# ---------------------------------------------------------------------------
# exactness


@dataclass(frozen=True)
class StrandCheck:
    level: int              # exactness at C_level
    strand: int | None      # None for the filtered (non-graded) check
    kernel_dim: int
    image_dim: int
    gap_ratios: tuple[float, ...]

    @property
    def exact(self) -> bool:
        return self.kernel_dim == self.image_dim


@dataclass(frozen=True, eq=False)
class ExactnessReport:
    composite_residual: float
    checks: tuple[StrandCheck, ...]
    flagged_strands: tuple[int, ...]
    cap: int
    label: str = TRUNCATION_LABEL
    note: str = NORMALIZATION_NOTE

    @property
    def composite_ok(self) -> bool:
        return self.composite_residual <= COMPOSITE_TOL

    @property
    def exact(self) -> bool:
        return self.composite_ok and all(c.exact for c in self.checks)

    @property
    def reliable(self) -> bool:
        from .rank import GAP_MIN
        return all(g >= GAP_MIN for c in self.checks for g in c.gap_ratios)


def composite_residual(R: ResolutionSpec) -> float:
    worst = 0.0
    for k in range(1, R.length):
        worst = max(worst, compose(R.map(k), R.map(k + 1)).max_abs())
    return worst


def _coord_degrees(space: DASpace, shifts: Sequence[int]) -> np.ndarray:
    return np.concatenate([space.basis.degrees + s for s in shifts]) if len(shifts) else np.zeros(0, int)


def verify_exactness(R: ResolutionSpec, space: DASpace, tol: float = DEFAULT_TOL,
                     atol: float = DEFAULT_ATOL) -> ExactnessReport:
    """Exactness at ``C_k`` for ``k >= 1`` on the truncated free modules.

    Graded resolutions are checked strand by strand for total degree ``t <= N``
    (every coordinate of such a strand is present); strands above ``N`` that
    carry generators are flagged and not asserted.  Non-graded resolutions are
    checked on the filtered section where ``C_k`` keeps module degree
    ``<= N - (deg Phi_1 + ... + deg Phi_k)``.
    """
    if space.d != R.d:
        raise ValueError("space and resolution disagree on d")
    comp = composite_residual(R)
    N = space.cap
    ops = [multiplier_operator(R.map(k), space, space) for k in range(1, R.length + 1)]
    checks = []
    flagged: set[int] = set()
    L = R.length
    if R.graded:
        degs = [_coord_degrees(space, R.shifts[k]) for k in range(L + 1)]
        # generators above the cap live in strands that are never asserted
        flagged.update(s for level in R.shifts for s in level if s > N)
        for k in range(1, L + 1):
            for t in range(N + 1):
                cols = np.where(degs[k] == t)[0]
                if len(cols) == 0:
                    continue
                rows = np.where(degs[k - 1] == t)[0]
                phi_k = ops[k - 1][np.ix_(rows, cols)]
                dec_k = numerical_rank(phi_k, tol, atol)
                kernel_dim = len(cols) - dec_k.rank
                gaps = [dec_k.gap_ratio]
                if k < L:
                    src = np.where(degs[k + 1] == t)[0]
                    phi_next = ops[k][np.ix_(cols, src)]
                    dec_n = numerical_rank(phi_next, tol, atol)
                    image_dim = dec_n.rank
                    gaps.append(dec_n.gap_ratio)
                else:
                    image_dim = 0
                checks.append(StrandCheck(k, t, kernel_dim, image_dim, tuple(gaps)))
    else:
        caps = [N]
        for k in range(1, L + 1):
            caps.append(caps[-1] - max(R.map(k).degree, 0))
        sels = [np.where(np.tile(space.basis.degrees, R.ranks[k]) <= caps[k])[0] for k in range(L + 1)]
        for k in range(1, L + 1):
            if caps[k] < 0:
                break
            phi_k = ops[k - 1][np.ix_(sels[k - 1], sels[k])]
            dec_k = numerical_rank(phi_k, tol, atol)
            kernel_dim = len(sels[k]) - dec_k.rank
            gaps = [dec_k.gap_ratio]
            if k < L and caps[k + 1] >= 0:
                phi_next = ops[k][np.ix_(sels[k], sels[k + 1])]
                dec_n = numerical_rank(phi_next, tol, atol)
                image_dim = dec_n.rank
                gaps.append(dec_n.gap_ratio)
            else:
                image_dim = 0
            checks.append(StrandCheck(k, None, kernel_dim, image_dim, tuple(gaps)))
    return ExactnessReport(comp, tuple(checks), tuple(sorted(flagged)), N)


# ---------------------------------------------------------------------------
# localization


@dataclass(frozen=True, eq=False)
class LocalizedComplex:
    point: np.ndarray
    matrices: tuple[np.ndarray, ...]   # matrices[k-1] = Phi_k(lam)
    dims: dict[int, int]               # k >= 1
    decisions: tuple[RankDecision, ...]
    warnings: tuple[str, ...] = ()

    @property
    def reliable(self) -> bool:
        return all(d.reliable for d in self.decisions)


def localized_homology(R: ResolutionSpec, lam, tol: float = DEFAULT_TOL, atol: float = DEFAULT_ATOL) -> LocalizedComplex:
    """``dim ker Phi_k(lam) - rank Phi_{k+1}(lam)`` for ``k = 1..length``."""
    lam = as_point(lam, R.d)
    mats = tuple(localize(phi, lam) for phi in R.maps)
    decs = tuple(numerical_rank(A, tol, atol) for A in mats)
    ranks = [d.rank for d in decs] + [0]
    dims = {k: int(R.ranks[k] - ranks[k - 1] - ranks[k]) for k in range(1, R.length + 1)}
    msgs = warn_if_unreliable([(f"Phi_{k + 1}(lam)", d) for k, d in enumerate(decs)], "localized complex")
    return LocalizedComplex(lam, mats, dims, decs, tuple(msgs))


# ---------------------------------------------------------------------------
# comparison harness


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    point: tuple[complex, ...]
    lhs: dict[int, int]
    rhs: dict[int, int]
    match: dict[int, bool]
    route: str
    lhs_gap: float
    rhs_gap: float
    factor_residual: float | None = None
    notes: tuple[str, ...] = (NORMALIZATION_NOTE, TRUNCATION_LABEL)

    @property
    def all_match(self) -> bool:
        return all(self.match.values())

    def to_dict(self) -> dict:
        def g(x):
            return x if math.isfinite(x) else None
        return {
            "point": [[z.real, z.imag] for z in self.point],
            "route": self.route,
            "k": sorted(self.match),
            "koszul_dims": [self.lhs[k] for k in sorted(self.match)],
            "localized_dims": [self.rhs[k] for k in sorted(self.match)],
            "match": [self.match[k] for k in sorted(self.match)],
            "koszul_min_gap": g(self.lhs_gap),
            "localized_min_gap": g(self.rhs_gap),
            "factor_residual": self.factor_residual,
            "notes": list(self.notes),
        }


def _refuse(rep_reliable: bool, what: str):
    if not rep_reliable:
        raise UnreliableRankError(f"{what} carries gap-flagged rank decisions; refusing to compare")


def _module_tuple(H) -> CommutingTuple:
    return H.tuple if isinstance(H, QuotientModule) else H


def _check_resolution(R: ResolutionSpec, d: int, verify_cap: int, tol: float):
    if R.d != d:
        raise ValueError(f"resolution has d={R.d} but the module has d={d}")
    rep = verify_exactness(R, DASpace(d, verify_cap), tol)
    if not rep.exact:
        raise ValueError("resolution failed the exactness check; comparison refused")
    _refuse(rep.reliable, "resolution exactness check")


def compare_theorem_39_25(R: ResolutionSpec, H, tol: float = DEFAULT_TOL, verify_cap: int = 4) -> ComparisonReport:
    """Koszul homology of ``H`` against the resolution localized at 0, for ``k >= 1``."""
    T = _module_tuple(H)
    _check_resolution(R, T.d, verify_cap, tol)
    if isinstance(H, QuotientModule) and not H.is_finite:
        if not H.graded:
            raise ValueError("non-graded quotient with truncation loss: no truncation-safe route")
        lhs = filtered_homology(H.tuple, H.degrees, H.parent.cap, None, tol)
        route = "strands<=N"
    else:
        lhs = homology_dims(build_koszul(T), tol)
        route = "finite"
    _refuse(lhs.reliable, "Koszul homology")
    rhs = localized_homology(R, np.zeros(T.d), tol)
    _refuse(rhs.reliable, "localized complex")
    return _assemble(np.zeros(T.d), lhs, rhs, route, None)


def compare_theorem_87(R: ResolutionSpec, H, phi: MoebiusMap, tol: float = DEFAULT_TOL,
                       verify_cap: int = 4) -> ComparisonReport:
    """Koszul homology of the transformed module against the resolution localized at ``phi^-1(0)``."""
    T = _module_tuple(H)
    if phi.d != T.d:
        raise ValueError("map and module disagree on d")
    _check_resolution(R, T.d, verify_cap, tol)
    lam = phi.base_point
    factor = moebius_factor_residual(T, phi) if T.n else 0.0
    if isinstance(H, QuotientModule) and not H.is_finite:
        if not H.graded:
            raise ValueError("non-graded quotient with truncation loss: no truncation-safe route")
        # phi(T) = -(uA)(T - lam)(I - sum conj(lam_k) T_k)^-1, so both share Koszul homology
        lhs = filtered_homology(H.tuple, H.degrees, H.parent.cap, lam, tol)
        route = "filtered-section(T-lam)"
    else:
        lhs = homology_dims(build_koszul(apply_moebius_to_tuple(T, phi)), tol)
        route = "finite"
    _refuse(lhs.reliable, "Koszul homology")
    rhs = localized_homology(R, lam, tol)
    _refuse(rhs.reliable, "localized complex")
    return _assemble(lam, lhs, rhs, route, factor)


def _assemble(lam, lhs: HomologyReport, rhs: LocalizedComplex, route: str, factor) -> ComparisonReport:
    d = len(lhs.dims) - 1
    top = max(d, max(rhs.dims, default=0))
    ks = range(1, top + 1)
    left = {k: (lhs.dims[k] if k <= d else 0) for k in ks}
    right = {k: rhs.dims.get(k, 0) for k in ks}
    match = {k: left[k] == right[k] for k in ks}
    rgap = min((dd.gap_ratio for dd in rhs.decisions), default=math.inf)
    return ComparisonReport(tuple(complex(x) for x in np.asarray(lam).reshape(-1)), left, right, match, route,
                            lhs.min_gap, rgap, factor)


def default_grid(d: int) -> list[np.ndarray]:
    """Five base points of radius <= 0.7: the origin, two axis points, two generic points."""
    if d == 1:
        pts = [[0], [0.5], [0.6j], [0.3 + 0.4j], [-0.2 - 0.5j]]
    else:
        a1 = np.zeros(d, complex)
        a1[0] = 0.5
        a2 = np.zeros(d, complex)
        a2[-1] = 0.6
        g1 = np.array([0.3, 0.4 - 0.1j] + [0.1] * (d - 2), complex)
        g2 = np.array([-0.2 + 0.3j, 0.1 + 0.4j] + [-0.2j] * (d - 2), complex)
        pts = [np.zeros(d), a1, a2, g1 * 0.7 / max(0.7, np.linalg.norm(g1)), g2 * 0.7 / max(0.7, np.linalg.norm(g2))]
    return [np.asarray(p, dtype=complex) for p in pts]


__all__ = [
    "MultiplierMatrix", "ResolutionSpec", "LocalizedComplex", "ComparisonReport", "ExactnessReport",
    "StrandCheck", "NormBoundReport", "compose", "localize", "apply_multiplier", "multiplier_operator",
    "adjoint_kernel_residual", "adjoint_tail_bound", "multiplier_norm_bound_check",
    "koszul_resolution_of_point", "taylor_resolution_monomial", "principal_resolution", "composite_residual",
    "verify_exactness", "localized_homology", "compare_theorem_39_25", "compare_theorem_87", "default_grid",
]
