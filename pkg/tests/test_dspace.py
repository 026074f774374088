import itertools
from collections import Counter

import numpy as np
import pytest

from hilmod.basis import enumerate_basis
from hilmod.dspace import (CommutingTuple, DASpace, NonCommutingError, da_inner, evaluate, kernel_vector,
                           monomial_generators, purity_defect, purity_profile, quotient_module,
                           row_contraction_defect, shift_matrix, weighted_adjoint)


def _word_counts(d, n):
    # number of words of length n over {0..d-1} with each letter count: the coefficient of
    # z^alpha conj(lam)^alpha in <z, lam>^n
    counts = Counter()
    for word in itertools.product(range(d), repeat=n):
        counts[tuple(word.count(i) for i in range(d))] += 1
    return counts


@pytest.mark.parametrize("d,cap", [(1, 4), (2, 4), (3, 3)])
def test_weights_match_kernel_expansion_oracle(d, cap):
    sp = DASpace(d, cap)
    for n in range(cap + 1):
        for alpha, c in _word_counts(d, n).items():
            # reproducing kernel = sum_alpha z^alpha conj(lam)^alpha / w_alpha
            assert sp.weights[sp.basis.index_of(alpha)] == pytest.approx(1.0 / c, rel=1e-15)


def test_inner_product_examples():
    sp = DASpace(2, 3)
    one = sp.monomial((0, 0))
    assert da_inner(one, one) == 1
    z1z2 = sp.monomial((1, 1))
    assert da_inner(z1z2, z1z2) == pytest.approx(0.5)
    assert da_inner(sp.monomial((1, 0)), sp.monomial((0, 1))) == 0
    with pytest.raises(ValueError):
        da_inner(one, DASpace(2, 2).monomial((0, 0)))


def test_kernel_vector_examples():
    k = kernel_vector([0.5], DASpace(1, 2))
    assert np.allclose(k.coeffs, [1, 0.5, 0.25])
    k0 = kernel_vector([0, 0], DASpace(2, 3))
    assert np.allclose(k0.coeffs, np.eye(1, 10)[0])
    sp = DASpace(2, 2)
    k = kernel_vector([0.5, 0.5], sp)
    assert k.coeffs[sp.basis.index_of((1, 1))] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        kernel_vector([0.8, 0.6], sp)


def test_evaluate_examples():
    sp = DASpace(2, 3)
    assert evaluate(sp.monomial((2, 0)), [0.3, 0]) == pytest.approx(0.09)
    assert evaluate(sp.monomial((0, 0)), [0.2, -0.4j]) == 1
    lam, mu = np.array([0.3, 0.1j]), np.array([0.2 - 0.1j, 0.4])
    t = np.vdot(mu, lam)  # <lam, mu>
    assert evaluate(kernel_vector(mu, sp), lam) == pytest.approx(sum(t ** n for n in range(4)), abs=1e-15)
    with pytest.raises(ValueError):
        evaluate(sp.monomial((0, 0)), [1.0, 0.0])


def test_reproducing_property_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        N = int(rng.integers(0, 6))
        sp = DASpace(d, N)
        xi = sp.vector(rng.standard_normal(sp.size) + 1j * rng.standard_normal(sp.size))
        lam = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        lam *= 0.9 * rng.uniform() / np.linalg.norm(lam)
        direct = sum(c * np.prod(lam ** np.array(a.exponents)) for c, a in zip(xi.coeffs, sp.basis))
        assert abs(da_inner(xi, kernel_vector(lam, sp)) - direct) <= 1e-12


def test_shift_matrix_examples():
    sp = DASpace(2, 3)
    S1 = shift_matrix(0, sp)
    one = sp.monomial((0, 0)).coeffs
    assert np.array_equal(S1.matrix @ one, sp.monomial((1, 0)).coeffs)
    top = sp.basis.index_of((3, 0))
    assert S1.overflow[top]
    assert not np.any(S1.matrix[:, top])
    S2 = shift_matrix(1, sp)
    assert np.array_equal(S1.matrix @ S2.matrix, S2.matrix @ S1.matrix)
    big = shift_matrix(0, sp, DASpace(2, 4))
    assert not big.overflow.any()


def test_weighted_adjoint_examples():
    sp = DASpace(2, 3)
    S1 = shift_matrix(0, sp).matrix
    A = weighted_adjoint(S1, sp)
    assert np.allclose(A @ sp.monomial((1, 0)).coeffs, sp.monomial((0, 0)).coeffs)
    assert np.allclose(A @ sp.monomial((1, 1)).coeffs, 0.5 * sp.monomial((0, 1)).coeffs)
    assert np.allclose(A @ sp.monomial((0, 0)).coeffs, 0)


def test_weighted_adjoint_identity_random():
    rng = np.random.default_rng(1)
    for _ in range(30):
        sp = DASpace(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        n = sp.size
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        xi = sp.vector(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        eta = sp.vector(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        lhs = da_inner(sp.vector(A @ xi.coeffs), eta)
        rhs = da_inner(xi, sp.vector(weighted_adjoint(A, sp) @ eta.coeffs))
        assert abs(lhs - rhs) <= 1e-12 * max(1, abs(lhs))


@pytest.mark.parametrize("d,N", [(1, 4), (2, 4), (3, 3)])
def test_shift_defect_is_projection_onto_constants(d, N):
    S = DASpace(d, N).shift_tuple()
    R = np.eye(S.n) - sum(A @ A.conj().T for A in S.matrices)
    P0 = np.zeros((S.n, S.n))
    P0[0, 0] = 1
    assert np.max(np.abs(R - P0)) <= 1e-12
    assert row_contraction_defect(S) == 0 or row_contraction_defect(S) <= 1e-15


def test_row_contraction_examples():
    assert row_contraction_defect(CommutingTuple(2 * np.eye(1)[None])) == pytest.approx(3)
    assert row_contraction_defect(CommutingTuple.zero(2, 3)) == 0


def test_purity_examples():
    S = DASpace(1, 2).shift_tuple()
    assert purity_defect(S, 3) == 0
    U = CommutingTuple(np.array([[[0, 1], [1, 0]]], dtype=complex))
    assert all(purity_defect(U, n) == pytest.approx(1) for n in range(6))
    assert purity_defect(CommutingTuple.zero(2), 1) == 0


@pytest.mark.parametrize("d,N", [(1, 5), (2, 4), (3, 3)])
def test_purity_of_shift_monotone_and_vanishes(d, N):
    prof = purity_profile(DASpace(d, N).shift_tuple(), N + 3)
    assert all(b <= a + 1e-14 for a, b in zip(prof, prof[1:]))
    assert prof[N] > 0
    assert prof[N + 1] == 0
    assert purity_defect(DASpace(d, N).shift_tuple(), N + 1) == 0


def test_non_commuting_tuple_names_pair():
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    B = A.T.copy()
    with pytest.raises(NonCommutingError) as err:
        CommutingTuple(np.stack([np.eye(2), A, B]))
    assert err.value.pair == (1, 2)
    assert err.value.residual == pytest.approx(1.0)
    assert "T2 and T3" in str(err.value)


def test_quotient_by_maximal_ideal():
    sp = DASpace(2, 3)
    q = quotient_module(sp, monomial_generators(sp, [(1, 0), (0, 1)]))
    assert q.dim == 1
    assert np.allclose(q.basis[:, 0], sp.monomial((0, 0)).coeffs)
    assert np.allclose(q.tuple.matrices, 0)
    assert q.is_finite


def _gram_schmidt_complement(sp, gens):
    # oracle: monomials not divisible by any generator span the complement of a monomial submodule
    keep = [i for i, a in enumerate(sp.basis) if not any(all(x >= y for x, y in zip(a.exponents, g)) for g in gens)]
    return keep


def test_quotient_z1sq_z2_against_oracle():
    sp = DASpace(2, 3)
    q = quotient_module(sp, monomial_generators(sp, [(2, 0), (0, 1)]))
    keep = _gram_schmidt_complement(sp, [(2, 0), (0, 1)])
    assert [sp.basis.entry_at(i).exponents for i in keep] == [(0, 0), (1, 0)]
    assert q.dim == 2
    # T1 sends 1 to z1 (both of unit norm), T1 z1 = z1^2 lies in the submodule; T2 = 0
    assert np.allclose(np.abs(q.tuple.matrices[0]), [[0, 0], [1, 0]])
    assert np.allclose(q.tuple.matrices[1], 0)


def test_quotient_by_constant_is_zero():
    sp = DASpace(2, 3)
    q = quotient_module(sp, monomial_generators(sp, [(0, 0)]))
    assert q.dim == 0 and q.tuple.n == 0
    with pytest.raises(ValueError):
        quotient_module(sp, [])


def test_quotient_properties_random_monomials():
    rng = np.random.default_rng(4)
    for _ in range(15):
        d = int(rng.integers(1, 4))
        N = int(rng.integers(2, 5))
        sp = DASpace(d, N)
        gens = [tuple(int(x) for x in rng.integers(0, 3, size=d)) for _ in range(int(rng.integers(1, 4)))]
        gens = [g for g in gens if 0 < sum(g) <= N] or [(1,) + (0,) * (d - 1)]
        q = quotient_module(sp, monomial_generators(sp, gens))
        assert q.dim == len(_gram_schmidt_complement(sp, gens))
        assert q.tuple.commutator_residual <= 1e-10
        G = q.basis.conj().T @ (sp.weights[:, None] * q.basis)
        assert np.allclose(G, np.eye(q.dim), atol=1e-12)


def test_quotient_non_homogeneous_generator():
    sp = DASpace(2, 4)
    g = sp.polynomial({(1, 0): 1.0, (0, 2): -0.5})
    q = quotient_module(sp, [g])
    assert not q.graded
    assert q.tuple.commutator_residual <= 1e-10
    # complement is orthogonal to every truncated z^beta g
    span = np.stack([(sp.monomial(b.exponents).series() * g.series()).to_vector(sp.basis)
                     for b in sp.basis if b.degree + 1 <= 4], axis=1)
    assert np.abs(q.basis.conj().T @ (sp.weights[:, None] * span)).max() <= 1e-12


def test_quotient_complement_is_coinvariant():
    # the complement is invariant under every S_i^*, so compression and restriction of S_i^* agree
    sp = DASpace(2, 5)
    g = sp.polynomial({(1, 0): 1.0, (0, 2): 0.3 - 0.2j, (1, 1): 0.1})
    q = quotient_module(sp, [g])
    C = sp.to_orthonormal(q.basis)
    for A in sp.shift_tuple().matrices:
        img = A.conj().T @ C
        assert np.linalg.norm(img - C @ (C.conj().T @ img)) <= 1e-12
