import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from hilmod.dspace import CommutingTuple, DASpace, monomial_generators
from hilmod.koszul import build_koszul, homology_dims, random_commuting_tuple
from hilmod.moebius import (MoebiusMap, SingularDenominatorError, apply_moebius_to_tuple, base_point_overlap,
                            base_point_transport_defect, build_composition_unitary, ergodicity_scan,
                            kernel_identity_residual, moebius_factor_residual, row_moebius_check,
                            row_moebius_closed_forms, unitarity_defect)


def _ball_point(rng, d, rmax=0.9):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v) * rmax * rng.uniform() ** (1 / (2 * d))


def _unitary(rng, d):
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.array([[np.exp(2j * np.pi * rng.uniform())]])


def test_basic_values():
    phi = MoebiusMap([0.3, -0.2j])
    assert np.allclose(phi(phi.lam), 0)
    assert np.allclose(phi([0, 0]), phi.lam)


def test_origin_map_is_minus_identity():
    z = np.array([0.1, 0.2j])
    assert np.allclose(MoebiusMap([0, 0])(z), -z)
    assert np.allclose(MoebiusMap.identity(2)(z), z)


def test_d1_explicit_formula():
    rng = np.random.default_rng(3)
    for _ in range(100):
        lam = _ball_point(rng, 1)[0]
        z = _ball_point(rng, 1)[0]
        assert np.isclose(MoebiusMap([lam])([z])[0], (lam - z) / (1 - np.conj(lam) * z))


def test_involution_and_boundary():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        phi = MoebiusMap(_ball_point(rng, d))
        z = _ball_point(rng, d)
        assert np.allclose(phi(phi(z)), z, atol=1e-12)
        b = _ball_point(rng, d)
        b = b / np.linalg.norm(b)
        assert np.isclose(np.linalg.norm(phi(b)), 1.0)
        assert np.linalg.norm(phi(z)) < 1


def test_kernel_identity_random_triples():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 4))
        worst = max(worst, kernel_identity_residual(_ball_point(rng, d), _ball_point(rng, d),
                                                    _ball_point(rng, d), _unitary(rng, d)))
    assert worst <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_kernel_identity_hypothesis(a, b, c, e):
    assert kernel_identity_residual([complex(a, b)], [complex(c, e)], [complex(e, a)]) <= 1e-12


def test_rejects_boundary_and_nonunitary():
    with pytest.raises(ValueError):
        MoebiusMap([1.0])
    with pytest.raises(ValueError):
        MoebiusMap([0.6, 0.8])
    with pytest.raises(ValueError):
        MoebiusMap([0.1, 0], u=[[1, 1], [0, 1]])


def test_unitary_first_column_d1():
    U = build_composition_unitary(MoebiusMap([0.5]), 0, 30)
    expected = np.sqrt(0.75) * 0.5 ** np.arange(31)
    assert np.allclose(U.matrix[:, 0], expected)


def test_unitarity_defect_decreases_with_expansion():
    phi = MoebiusMap([0.5, 0.0])
    defects = [unitarity_defect(build_composition_unitary(phi, 4, M)) for M in (14, 24, 34, 44)]
    assert all(b <= a + 1e-14 for a, b in zip(defects, defects[1:]))
    assert defects[-1] <= 1e-10
    assert abs(base_point_overlap(build_composition_unitary(phi, 4, 44)) - 1) <= 1e-10


def test_transport_to_base_point():
    rng = np.random.default_rng(6)
    for _ in range(5):
        U = build_composition_unitary(MoebiusMap(_ball_point(rng, 2, 0.6)), 3, 43)
        assert base_point_transport_defect(U) <= 1e-10


def test_intertwining_with_kernels():
    # (U xi)(w) = xi(phi(w)) s / (1 - <w, lam>)
    rng = np.random.default_rng(7)
    phi = MoebiusMap([0.3, 0.1j])
    U = build_composition_unitary(phi, 3, 60)
    sp = U.target
    for _ in range(10):
        w = _ball_point(rng, 2, 0.3)
        xi = rng.standard_normal(U.source.size) + 0j
        img = U.apply(xi)
        got = np.sum(img * np.prod(w[None, :] ** sp.basis.exponent_array, axis=1))
        pw = phi(w)
        want = np.sum(xi * np.prod(pw[None, :] ** U.source.basis.exponent_array, axis=1))
        want *= phi.s / (1 - np.vdot(phi.lam, w))
        assert abs(got - want) <= 1e-10


def test_square_is_identity_for_origin_map():
    U = build_composition_unitary(MoebiusMap([0, 0]), 4, 4)
    C = U.compressed()
    assert np.allclose(C @ C, np.eye(C.shape[0]))
    # block diagonal in degree
    degs = U.source.basis.degrees
    assert not np.any(np.abs(C[degs[:, None] != degs[None, :]]) > 1e-14)


def test_row_check_examples():
    a, b, c = row_moebius_closed_forms([0.5], [0], [0])
    assert np.allclose([a, b, c], 0.75)
    rng = np.random.default_rng(8)
    samples = [(_ball_point(rng, 2), _ball_point(rng, 2)) for _ in range(50)]
    rep = row_moebius_check([0.3, -0.4j], DASpace(2, 4), samples)
    assert rep.ok and rep.samples == 50
    assert rep.closed_form_residual <= 1e-12
    assert rep.operator_residual <= 1e-10


def test_apply_to_tuple_examples():
    lam = np.array([0.2, 0.3j])
    out = apply_moebius_to_tuple(CommutingTuple.zero(2, 3), MoebiusMap(lam))
    assert np.allclose(out.matrices, lam[:, None, None] * np.eye(3)[None])
    S = DASpace(2, 3).shift_tuple()
    same = apply_moebius_to_tuple(S, MoebiusMap.identity(2))
    assert np.allclose(same.matrices, S.matrices)
    phi = MoebiusMap(lam)
    back = apply_moebius_to_tuple(apply_moebius_to_tuple(S, phi), phi)
    assert np.allclose(back.matrices, S.matrices, atol=1e-12)
    assert moebius_factor_residual(S, phi) <= 1e-12


def test_apply_rejects_non_contractions():
    with pytest.raises(ValueError):
        apply_moebius_to_tuple(CommutingTuple.scalar([0.9, 0.9]), MoebiusMap([0.1, 0]))
    with pytest.raises(SingularDenominatorError):
        apply_moebius_to_tuple(CommutingTuple.scalar([1.0, 0]), MoebiusMap([1 - 1e-13, 0]))


def test_transform_moves_spectrum_point_to_origin():
    rng = np.random.default_rng(9)
    for _ in range(10):
        T = random_commuting_tuple(rng, 3, 2, scale=0.3)
        T = CommutingTuple(T.matrices * 0.5 / max(1.0, np.linalg.norm(np.hstack(list(T.matrices)), 2)))
        # joint eigenvalue from an eigenvector of a generic combination
        _, V = np.linalg.eig(T.matrices[0] + 0.37 * T.matrices[1])
        v = V[:, 0]
        lam = np.array([np.vdot(v, A @ v) / np.vdot(v, v) for A in T.matrices])
        phi = MoebiusMap(lam)
        h1 = homology_dims(build_koszul(T.shifted(lam))).dims
        h2 = homology_dims(build_koszul(apply_moebius_to_tuple(T, phi))).dims
        assert h1 == h2


def test_ergodicity_examples():
    sp = DASpace(2, 4)
    rep = ergodicity_scan(sp, monomial_generators(sp, [(1, 1)]), [[0, 0], [0.5, 0], [0.3, 0.4j]], M=30)
    assert rep.found
    assert rep.point is not None and rep.point != (0, 0)
    assert rep.defect > rep.threshold
    # the origin map keeps every monomial submodule: defect 0 there
    assert rep.max_defects[0] <= 1e-12
    with pytest.raises(ValueError):
        ergodicity_scan(sp, [], [[0.1, 0]])
