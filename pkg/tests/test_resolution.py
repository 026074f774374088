import math

import numpy as np
import pytest

from hilmod.basis import TruncatedSeries
from hilmod.dspace import CommutingTuple, DASpace, evaluate, monomial_generators, quotient_module
from hilmod.moebius import MoebiusMap
from hilmod.rank import GapWarning, UnreliableRankError
from hilmod.resolution import (MultiplierMatrix, ResolutionSpec, adjoint_kernel_residual, adjoint_tail_bound,
                               apply_multiplier, compare_theorem_39_25, compare_theorem_87, compose,
                               composite_residual, default_grid, koszul_resolution_of_point, localize,
                               localized_homology, multiplier_norm_bound_check, multiplier_operator,
                               principal_resolution, taylor_resolution_monomial, verify_exactness)


def _rand_poly(rng, d, deg, nterms=4):
    terms = {}
    for _ in range(nterms):
        e = np.zeros(d, int)
        for _ in range(int(rng.integers(0, deg + 1))):
            e[rng.integers(d)] += 1
        terms[tuple(e)] = complex(rng.standard_normal(), rng.standard_normal())
    return terms


def _rand_matrix(rng, d, r, c, deg=2):
    return MultiplierMatrix.from_terms([[_rand_poly(rng, d, deg) for _ in range(c)] for _ in range(r)], d, deg)


def _terms(phi, r, c):
    return {a.exponents: v for a, v in phi.terms(r, c).items()}


def _ball_point(rng, d, rmax=0.8):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v) * rmax * rng.uniform()


def test_apply_multiplier_example():
    sp = DASpace(2, 3)
    phi = MultiplierMatrix.from_terms([[{(1, 0): 1}, {(0, 1): 1}]], 2)
    out = apply_multiplier(phi, [sp.monomial((0, 1)), sp.monomial((1, 0), -1)])
    assert out[0].norm() == 0
    with pytest.raises(ValueError):
        apply_multiplier(phi, [sp.monomial((0, 3)), sp.zero()])
    trunc = apply_multiplier(phi, [sp.monomial((0, 3)), sp.zero()], strict=False)
    assert trunc[0].norm() == 0


def test_localize_example():
    phi = MultiplierMatrix.from_terms([[{(1, 0): 1, (0, 0): -0.5}], [{(0, 2): 2}]], 2)
    assert np.allclose(localize(phi, [0.5, 0.3]), [[0], [0.18]])


def test_localization_is_a_ring_map():
    rng = np.random.default_rng(11)
    for _ in range(40):
        d = int(rng.integers(1, 4))
        a, b, c = (int(x) for x in rng.integers(1, 4, size=3))
        P, Q = _rand_matrix(rng, d, a, b), _rand_matrix(rng, d, b, c)
        lam = _ball_point(rng, d)
        assert np.allclose(localize(compose(P, Q), lam), localize(P, lam) @ localize(Q, lam))


def test_compose_shape_mismatch():
    with pytest.raises(ValueError):
        compose(MultiplierMatrix.constant(np.eye(2), 1), MultiplierMatrix.constant(np.eye(3), 1))


def test_operator_matches_pointwise_action():
    rng = np.random.default_rng(12)
    sp = DASpace(2, 3)
    phi = _rand_matrix(rng, 2, 2, 3)
    A = multiplier_operator(phi, sp)
    tgt = DASpace(2, 3 + phi.degree)
    xi = [sp.vector(rng.standard_normal(sp.size) + 0j) for _ in range(3)]
    x = np.concatenate([sp.to_orthonormal(v.coeffs) for v in xi])
    y = A @ x
    z = _ball_point(rng, 2, 0.5)
    for r in range(2):
        got = evaluate(tgt.vector(tgt.from_orthonormal(y[r * tgt.size:(r + 1) * tgt.size])), z)
        want = sum(phi.entry(r, c)(z) * evaluate(xi[c], z) for c in range(3))
        assert np.isclose(got, want)


def test_adjoint_kernel_identity_exact_and_tail():
    rng = np.random.default_rng(13)
    sp = DASpace(2, 3)
    for _ in range(20):
        phi = _rand_matrix(rng, 2, 2, 2)
        lam = _ball_point(rng, 2, 0.7)
        eta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        eta /= np.linalg.norm(eta)
        assert adjoint_kernel_residual(phi, lam, eta, sp) <= 1e-12
        M = 3
        assert adjoint_kernel_residual(phi, lam, eta, sp, M) <= adjoint_tail_bound(phi, lam, sp, M) + 1e-12


def test_norm_bound():
    rng = np.random.default_rng(14)
    sp = DASpace(2, 4)
    for _ in range(10):
        phi = _rand_matrix(rng, 2, 2, 2)
        rep = multiplier_norm_bound_check(phi, [_ball_point(rng, 2, 0.95) for _ in range(100)], sp)
        assert rep.ok and rep.samples == 100
    # constants: ||Phi(lam)|| equals the operator norm
    rep = multiplier_norm_bound_check(MultiplierMatrix.constant([[3.0]], 2), [[0.1, 0.2]], sp)
    assert rep.max_local_norm == pytest.approx(3.0)


def test_koszul_resolution_builder():
    R = koszul_resolution_of_point(None, 2)
    assert R.ranks == (1, 2, 1)
    assert R.shifts == ((0,), (1, 1), (2,))
    # Phi_2 = (-z2, z1)^T in the e1, e2 layout
    assert _terms(R.map(2), 0, 0) == {(0, 1): -1}
    assert _terms(R.map(2), 1, 0) == {(1, 0): 1}
    assert composite_residual(R) == 0
    off = koszul_resolution_of_point([0.2, 0.1j], 2)
    assert not off.graded
    assert np.allclose(localize(off.map(1), [0.2, 0.1j]), 0)


def test_taylor_resolution_builder():
    R = taylor_resolution_monomial([(2, 0), (1, 1)], 2)
    assert R.ranks == (1, 2, 1)
    assert R.shifts == ((0,), (2, 2), (3,))
    assert _terms(R.map(2), 0, 0) == {(0, 1): -1}
    assert _terms(R.map(2), 1, 0) == {(1, 0): 1}
    assert composite_residual(R) == 0
    R3 = taylor_resolution_monomial([(2, 0), (1, 1), (0, 2)], 2)
    assert R3.ranks == (1, 3, 3, 1)
    assert composite_residual(R3) == 0
    with pytest.raises(ValueError):
        taylor_resolution_monomial([(0, 0)], 2)
    with pytest.raises(ValueError):
        taylor_resolution_monomial([(3, 0), (0, 3)], 2, cap=5)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_verify_koszul_resolution(d):
    rep = verify_exactness(koszul_resolution_of_point(None, d), DASpace(d, 4))
    assert rep.exact and rep.reliable and rep.composite_ok
    assert rep.flagged_strands == ()


@pytest.mark.parametrize("gens", [[(1, 1)], [(2, 0), (1, 1)], [(2, 0), (0, 1)], [(2, 0), (1, 1), (0, 2)]])
def test_verify_taylor_resolutions(gens):
    rep = verify_exactness(taylor_resolution_monomial(gens, 2), DASpace(2, 5))
    assert rep.exact and rep.reliable


def test_verify_flags_high_generators():
    rep = verify_exactness(taylor_resolution_monomial([(3, 0), (0, 3)], 2), DASpace(2, 4))
    assert 6 in rep.flagged_strands
    assert rep.exact


def test_verify_non_graded():
    rep = verify_exactness(koszul_resolution_of_point([0.3, -0.2], 2), DASpace(2, 4))
    assert rep.exact and rep.reliable
    assert all(c.strand is None for c in rep.checks)


def test_corrupted_sign_is_detected():
    R = koszul_resolution_of_point(None, 2)
    bad = MultiplierMatrix.from_terms([[{(0, 1): 1}], [{(1, 0): 1}]], 2, 1)
    broken = ResolutionSpec(2, R.ranks, (R.map(1), bad), R.target, R.shifts)
    rep = verify_exactness(broken, DASpace(2, 4))
    assert composite_residual(broken) == 2
    assert not rep.composite_ok and not rep.exact


def test_incomplete_resolution_is_not_exact():
    R = koszul_resolution_of_point(None, 2)
    short = ResolutionSpec(2, R.ranks[:2], R.maps[:1], R.target, R.shifts[:2])
    assert not verify_exactness(short, DASpace(2, 4)).exact


def test_principal_resolution():
    R = principal_resolution({(1, 1): 1.0, (2, 0): 0.5}, 2)
    assert R.graded and R.shifts == ((0,), (2,))
    assert verify_exactness(R, DASpace(2, 4)).exact
    Rn = principal_resolution({(1, 0): 1.0, (0, 0): -0.3}, 2)
    assert not Rn.graded
    assert verify_exactness(Rn, DASpace(2, 4)).exact


def test_localized_homology_examples():
    R = koszul_resolution_of_point(None, 2)
    assert localized_homology(R, [0, 0]).dims == {1: 2, 2: 1}
    assert localized_homology(R, [0.3, 0]).dims == {1: 0, 2: 0}
    T = taylor_resolution_monomial([(2, 0), (1, 1)], 2)
    # on the line z1 = 0 away from the origin the ideal is locally (z1)
    assert localized_homology(T, [0, 0.4]).dims == {1: 1, 2: 0}
    assert localized_homology(T, [0, 0]).dims == {1: 2, 2: 1}
    assert localized_homology(T, [0.4, 0]).dims == {1: 0, 2: 0}


def test_compare_point_modules():
    for d in (1, 2, 3):
        rep = compare_theorem_39_25(koszul_resolution_of_point(None, d), CommutingTuple.zero(d))
        assert rep.all_match
        assert [rep.lhs[k] for k in range(1, d + 1)] == [math.comb(d, k) for k in range(1, d + 1)]
    rep = compare_theorem_39_25(koszul_resolution_of_point(None, 2), CommutingTuple.zero(2))
    assert (rep.lhs[1], rep.lhs[2]) == (2, 1)


@pytest.mark.parametrize("gens", [[(1, 1)], [(2, 0), (1, 1)], [(2, 0), (0, 1)], [(2, 0), (1, 1), (0, 2)]])
def test_compare_quotients(gens):
    sp = DASpace(2, 6)
    H = quotient_module(sp, monomial_generators(sp, gens))
    R = taylor_resolution_monomial(gens, 2)
    assert compare_theorem_39_25(R, H).all_match
    for lam in default_grid(2):
        rep = compare_theorem_87(R, H, MoebiusMap(lam))
        assert rep.all_match, (gens, lam, rep.to_dict())


def test_compare_moebius_point_module():
    R = koszul_resolution_of_point(None, 2)
    for lam in default_grid(2):
        rep = compare_theorem_87(R, CommutingTuple.zero(2), MoebiusMap(lam))
        assert rep.all_match
        assert rep.factor_residual <= 1e-12


def test_compare_refuses_bad_input():
    R = koszul_resolution_of_point(None, 2)
    with pytest.raises(ValueError):
        compare_theorem_39_25(R, CommutingTuple.zero(3))
    bad = MultiplierMatrix.from_terms([[{(0, 1): 1}], [{(1, 0): 1}]], 2, 1)
    with pytest.raises(ValueError):
        compare_theorem_39_25(ResolutionSpec(2, R.ranks, (R.map(1), bad), R.target, R.shifts),
                              CommutingTuple.zero(2))
    # a point 5e-12 from the origin sits within a factor 10 of the rank threshold
    with pytest.warns(GapWarning), pytest.raises(UnreliableRankError):
        compare_theorem_39_25(koszul_resolution_of_point([5e-12, 0], 2), CommutingTuple.scalar([5e-12, 0]))


def test_report_to_dict():
    rep = compare_theorem_39_25(koszul_resolution_of_point(None, 2), CommutingTuple.zero(2))
    out = rep.to_dict()
    assert out["k"] == [1, 2] and out["koszul_dims"] == [2, 1] and out["match"] == [True, True]
    assert out["koszul_min_gap"] is None


def test_default_grid_inside_ball():
    for d in (1, 2, 3, 4):
        g = default_grid(d)
        assert len(g) == 5 and np.allclose(g[0], 0)
        assert all(np.linalg.norm(p) <= 0.7 + 1e-15 for p in g)
