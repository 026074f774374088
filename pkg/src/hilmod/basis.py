"""Multi-indices, graded monomial bases, wedge bases and truncated power series.

Variables are indexed from 0 in every array-facing API (``z[0]`` is the first
coordinate).  Wedge indices are the exception: a :class:`WedgeIndex` names
``e_{i_1} ^ ... ^ e_{i_k}`` with labels in ``1..d``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of a monomial ``z^alpha``."""

    exponents: tuple[int, ...]
    degree: int = field(init=False, compare=False)

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if len(exps) < 1:
            raise ValueError("a multi-index needs at least one variable")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "degree", sum(exps))

    @property
    def d(self) -> int:
        return len(self.exponents)

    def sort_key(self):
        return (self.degree, self.exponents)

    def __lt__(self, other: MultiIndex) -> bool:
        return self.sort_key() < other.sort_key()

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, i):
        return self.exponents[i]

    def __add__(self, other: MultiIndex) -> MultiIndex:
        return MultiIndex(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for e in self.exponents)

    def multinomial(self) -> int:
        """``|alpha|! / alpha!``."""
        return math.factorial(self.degree) // self.factorial()

    def __repr__(self):
        return f"MultiIndex{self.exponents}"


def _compositions(total: int, parts: int):
    # all exponent tuples of length `parts` summing to `total`, lex ascending
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class GradedBasis:
    """Monomials of total degree <= cap in graded-lex order.

    Entries are sorted by ``(degree, exponents)``, so each homogeneous degree
    occupies one contiguous block.
    """

    def __init__(self, d: int, cap: int):
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        if cap < 0:
            raise ValueError(f"cap must be >= 0, got {cap}")
        self.d = int(d)
        self.cap = int(cap)
        entries = []
        starts = []
        for s in range(cap + 1):
            starts.append(len(entries))
            entries.extend(MultiIndex(e) for e in _compositions(s, d))
        starts.append(len(entries))
        self.entries: tuple[MultiIndex, ...] = tuple(entries)
        self._starts = tuple(starts)
        self._index = {m.exponents: i for i, m in enumerate(self.entries)}
        self.exponent_array = np.array([m.exponents for m in self.entries], dtype=int).reshape(-1, d)
        self.degrees = self.exponent_array.sum(axis=1)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedBasis) and (self.d, self.cap) == (other.d, other.cap)

    def __hash__(self):
        return hash((self.d, self.cap))

    def __repr__(self):
        return f"GradedBasis(d={self.d}, cap={self.cap}, size={len(self)})"

    def entry_at(self, i: int) -> MultiIndex:
        return self.entries[i]

    def index_of(self, alpha) -> int:
        key = alpha.exponents if isinstance(alpha, MultiIndex) else tuple(int(a) for a in alpha)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"{key} is not in {self!r}") from None

    def contains(self, alpha) -> bool:
        key = alpha.exponents if isinstance(alpha, MultiIndex) else tuple(alpha)
        return key in self._index

    def block(self, s: int) -> slice:
        """Slice of the homogeneous degree-``s`` monomials."""
        if s < 0 or s > self.cap:
            return slice(0, 0)
        return slice(self._starts[s], self._starts[s + 1])

    def upto(self, s: int) -> slice:
        """Slice of all monomials of degree <= ``s`` (a prefix of the basis)."""
        s = min(s, self.cap)
        if s < 0:
            return slice(0, 0)
        return slice(0, self._starts[s + 1])

    def tensor_indices(self) -> tuple[np.ndarray, ...]:
        """Index arrays mapping basis order into a dense ``(cap+1,)*d`` tensor."""
        return tuple(self.exponent_array[:, i] for i in range(self.d))


@lru_cache(maxsize=64)
def enumerate_basis(d: int, cap: int) -> GradedBasis:
    return GradedBasis(d, cap)


@dataclass(frozen=True)
class WedgeIndex:
    """Strictly increasing labels ``(i_1 < ... < i_k)`` in ``1..d``."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"wedge indices must be strictly increasing: {idx}")
        if idx and idx[0] < 1:
            raise ValueError(f"wedge labels start at 1: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    def remove(self, position: int) -> WedgeIndex:
        """Drop the entry at 0-based ``position`` (the hat in ``e_{i_j}``)."""
        return WedgeIndex(self.indices[:position] + self.indices[position + 1:])

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return "e{" + ",".join(map(str, self.indices)) + "}"


def wedge_basis(d: int, k: int) -> list[WedgeIndex]:
    if k < 0 or k > d:
        return []
    return [WedgeIndex(c) for c in itertools.combinations(range(1, d + 1), k)]


# ---------------------------------------------------------------------------
# truncated series


@lru_cache(maxsize=64)
def _degree_mask(d: int, cap: int) -> np.ndarray:
    grids = np.indices((cap + 1,) * d).sum(axis=0)
    return grids <= cap


class TruncatedSeries:
    """Power series in ``d`` variables with every term of degree > cap dropped.

    Coefficients live in a dense ``(cap+1,)*d`` complex tensor indexed by the
    exponent vector; entries above the cap are kept at exactly zero.
    ``coefficients`` gives the sparse ``{MultiIndex: value}`` view.
    """

    __slots__ = ("d", "cap", "_data")

    def __init__(self, d: int, cap: int, data: np.ndarray | None = None):
        if d < 1 or cap < 0:
            raise ValueError(f"invalid series shape d={d}, cap={cap}")
        self.d = int(d)
        self.cap = int(cap)
        shape = (cap + 1,) * d
        if data is None:
            self._data = np.zeros(shape, dtype=complex)
        else:
            arr = np.asarray(data, dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"data shape {arr.shape} != {shape}")
            self._data = np.where(_degree_mask(d, cap), arr, 0)

    # constructors ---------------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Mapping, d: int, cap: int) -> TruncatedSeries:
        """Build from ``{exponent tuple or MultiIndex: coefficient}``; terms above cap are dropped."""
        out = cls(d, cap)
        for alpha, c in terms.items():
            exps = alpha.exponents if isinstance(alpha, MultiIndex) else tuple(alpha)
            if len(exps) != d:
                raise ValueError(f"exponent {exps} does not have {d} entries")
            if sum(exps) <= cap:
                out._data[exps] += c
        return out

    @classmethod
    def constant(cls, value, d: int, cap: int) -> TruncatedSeries:
        out = cls(d, cap)
        out._data[(0,) * d] = value
        return out

    @classmethod
    def variable(cls, i: int, d: int, cap: int) -> TruncatedSeries:
        out = cls(d, cap)
        if cap >= 1:
            idx = [0] * d
            idx[i] = 1
            out._data[tuple(idx)] = 1.0
        return out

    @classmethod
    def linear(cls, coeffs: Sequence, d: int, cap: int, constant=0.0) -> TruncatedSeries:
        """``constant + sum_i coeffs[i] z_i``."""
        out = cls.constant(constant, d, cap)
        if cap >= 1:
            for i, c in enumerate(coeffs):
                idx = [0] * d
                idx[i] = 1
                out._data[tuple(idx)] += c
        return out

    @classmethod
    def from_vector(cls, basis: GradedBasis, vec) -> TruncatedSeries:
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (len(basis),):
            raise ValueError(f"vector length {vec.shape} != basis size {len(basis)}")
        out = cls(basis.d, basis.cap)
        out._data[basis.tensor_indices()] = vec
        return out

    # views ------------------------------------------------------------------
    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def coefficients(self) -> dict[MultiIndex, complex]:
        nz = np.argwhere(self._data != 0)
        return {MultiIndex(tuple(int(x) for x in idx)): complex(self._data[tuple(idx)]) for idx in nz}

    def coeff(self, alpha) -> complex:
        exps = alpha.exponents if isinstance(alpha, MultiIndex) else tuple(alpha)
        if sum(exps) > self.cap:
            return 0j
        return complex(self._data[tuple(exps)])

    def to_vector(self, basis: GradedBasis) -> np.ndarray:
        """Coefficients in ``basis`` order; terms beyond ``basis.cap`` are dropped."""
        if basis.d != self.d:
            raise ValueError("dimension mismatch")
        out = np.zeros(len(basis), dtype=complex)
        keep = basis.degrees <= self.cap
        idx = tuple(a[keep] for a in basis.tensor_indices())
        out[keep] = self._data[idx]
        return out

    def degree(self) -> int:
        """Largest total degree carrying a nonzero coefficient (-1 for zero)."""
        nz = np.argwhere(self._data != 0)
        return int(nz.sum(axis=1).max()) if len(nz) else -1

    def truncate(self, cap: int) -> TruncatedSeries:
        """Re-cap the series (dropping or zero-padding)."""
        out = TruncatedSeries(self.d, cap)
        m = min(cap, self.cap)
        sl = (slice(0, m + 1),) * self.d
        out._data[sl] = self._data[sl]
        out._data = np.where(_degree_mask(self.d, cap), out._data, 0)
        return out

    def __call__(self, point) -> complex:
        """Evaluate the (polynomial) truncation at ``point``."""
        z = np.asarray(point, dtype=complex).reshape(-1)
        if z.shape != (self.d,):
            raise ValueError(f"point must have {self.d} coordinates")
        acc = self._data
        powers = np.arange(self.cap + 1)
        for i in range(self.d - 1, -1, -1):
            acc = acc @ (z[i] ** powers)
        return complex(acc)

    # arithmetic -------------------------------------------------------------
    def _check(self, other: TruncatedSeries):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: d={self.d} vs d={other.d}")
        if other.cap != self.cap:
            raise ValueError(f"cap mismatch: {self.cap} vs {other.cap}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TruncatedSeries.constant(other, self.d, self.cap)
        self._check(other)
        return TruncatedSeries(self.d, self.cap, self._data + other._data)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.d, self.cap, -self._data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return TruncatedSeries(self.d, self.cap, self._data * other)
        return series_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return TruncatedSeries(self.d, self.cap, self._data * other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = TruncatedSeries.constant(1.0, self.d, self.cap)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def max_abs_diff(self, other: TruncatedSeries) -> float:
        self._check(other)
        return float(np.max(np.abs(self._data - other._data), initial=0.0))

    def __repr__(self):
        terms = sorted(self.coefficients.items(), key=lambda kv: kv[0].sort_key())
        shown = " + ".join(f"({c:.6g})z^{m.exponents}" for m, c in terms[:6])
        more = " + ..." if len(terms) > 6 else ""
        return f"TruncatedSeries(d={self.d}, cap={self.cap}: {shown or '0'}{more})"


_SPARSE_TERMS = 64
_DIRECT_WORK = 4_000_000


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product with every term above the common cap dropped.

    A factor with few terms is applied by shift-and-add, which is exact in the
    sense that structural zeros stay zero.  Two dense factors go through
    ``scipy.signal.convolve`` (FFT for large tensors, so zeros may pick up
    rounding noise of order 1e-16 relative).
    """
    a._check(b)
    cap, d = a.cap, a.d
    nz_a, nz_b = np.argwhere(a.data != 0), np.argwhere(b.data != 0)
    if len(nz_a) > len(nz_b):
        a, b, nz_a = b, a, nz_b
    if len(nz_a) <= _SPARSE_TERMS or a.data.size * b.data.size <= _DIRECT_WORK:
        out = np.zeros_like(b.data)
        for idx in nz_a:
            shift = int(idx.sum())
            if shift > cap:
                continue
            src = tuple(slice(0, cap + 1 - int(i)) for i in idx)
            dst = tuple(slice(int(i), cap + 1) for i in idx)
            out[dst] += a.data[tuple(idx)] * b.data[src]
        return TruncatedSeries(d, cap, out)
    full = signal.convolve(a.data, b.data)
    sl = (slice(0, cap + 1),) * d
    return TruncatedSeries(d, cap, full[sl])


def geometric_inverse(linear: TruncatedSeries, cap: int | None = None) -> TruncatedSeries:
    """Truncation of ``1 / (1 - linear)`` for a linear form without constant term.

    Uses the multinomial expansion: the coefficient of ``z^alpha`` is
    ``|alpha|!/alpha! * prod c_i^alpha_i``.
    """
    cap = linear.cap if cap is None else int(cap)
    if linear.coeff((0,) * linear.d) != 0:
        raise ValueError("geometric_inverse needs a zero constant term")
    if linear.degree() > 1:
        raise ValueError("geometric_inverse expects a series of degree <= 1")
    c = np.array([linear.coeff(tuple(int(i == j) for j in range(linear.d))) for i in range(linear.d)])
    basis = enumerate_basis(linear.d, cap)
    vec = np.array([m.multinomial() for m in basis], dtype=float).astype(complex)
    vec *= np.prod(c[None, :] ** basis.exponent_array, axis=1)
    return TruncatedSeries.from_vector(basis, vec)


class _PowerTable:
    def __init__(self, images: Sequence[TruncatedSeries]):
        self.images = list(images)
        self.table: dict[tuple[int, int], TruncatedSeries] = {}

    def power(self, i: int, n: int) -> TruncatedSeries:
        img = self.images[i]
        if n == 0:
            return TruncatedSeries.constant(1.0, img.d, img.cap)
        if n == 1:
            return img
        key = (i, n)
        if key not in self.table:
            self.table[key] = series_mul(self.power(i, n - 1), img)
        return self.table[key]


def substitute_many(polys: Iterable[TruncatedSeries], images: Sequence[TruncatedSeries],
                    cap: int) -> list[TruncatedSeries]:
    """:func:`substitute` for several polynomials sharing one power table."""
    images = list(images)
    if not images:
        raise ValueError("need one image per variable")
    for img in images:
        if img.cap != cap:
            raise ValueError(f"image cap {img.cap} != requested cap {cap}")
        if img.d != images[0].d:
            raise ValueError("images disagree on the number of variables")
    table = _PowerTable(images)
    out = []
    for poly in polys:
        if poly.d != len(images):
            raise ValueError(f"{poly.d} variables but {len(images)} images")
        acc = TruncatedSeries(images[0].d, cap)
        for alpha, c in poly.coefficients.items():
            term = TruncatedSeries.constant(c, images[0].d, cap)
            for i, e in enumerate(alpha.exponents):
                if e:
                    term = series_mul(term, table.power(i, e))
            acc = acc + term
        out.append(acc)
    return out


def substitute(poly: TruncatedSeries, images: Sequence[TruncatedSeries], cap: int) -> TruncatedSeries:
    """Truncated composition ``poly(images[0], ..., images[d-1])``."""
    return substitute_many([poly], images, cap)[0]
