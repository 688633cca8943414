import numpy as np
import pytest

from sp2lab import quat, sp2
from sp2lab.quat import qmul, qnorm
from sp2lab.sp2 import (
    AL,
    AR,
    AU,
    AD,
    A20,
    ActionDescriptor,
    CHART_BASIS,
    Sp2Point,
    TangentVec,
    act,
    binner,
    binner_c,
    chart_points_and_frames,
    exp_chart,
    from_complex4,
    identity_point,
    killing_coords,
    killing_field,
    left_coords,
    mconjT,
    mmul,
    representative_point,
    splitting_at,
    tangent_coords,
    tangent_from_coords,
    to_complex4,
)


def random_point(rng):
    """Random Sp(2) point via the chart at a random representative."""
    Q = representative_point(rng.uniform(0, np.pi - 0.01), rng.uniform(0, np.pi / 4))
    x = rng.uniform(-0.4, 0.4, 10)
    x = 0.45 * x / max(1.0, np.linalg.norm(x) / 0.45)
    return exp_chart(Q, x)


def random_tangent(rng, Q):
    return tangent_from_coords(Q, rng.standard_normal(10))


def test_identity_is_point():
    identity_point().check()


def test_representative_point_t0_is_identity():
    P = representative_point(0.0, 0.0)
    assert np.allclose(P.m, sp2.identity_mat())


def test_representative_point_tpi4():
    P = representative_point(0.0, np.pi / 4)
    s = np.sqrt(2) / 2
    assert np.allclose(P.a, s * quat.ONE)
    assert np.allclose(P.b, s * quat.I)
    assert np.allclose(P.c, s * quat.I)
    assert np.allclose(P.d, s * quat.ONE)


def test_representative_point_grid_invariants():
    for theta in np.linspace(0, np.pi - 1e-9, 32):
        for t in np.linspace(0, np.pi / 4, 32):
            assert representative_point(theta, t).constraint_residual() < 1e-12


def test_representative_point_rejects_bad_ranges():
    with pytest.raises(ValueError):
        representative_point(0.0, 1.0)
    with pytest.raises(ValueError):
        representative_point(3.5, 0.1)
    with pytest.raises(ValueError):
        representative_point(0.0, 0.1, alpha=quat.ONE)


def test_actions_preserve_invariants():
    rng = np.random.default_rng(0)
    Q = random_point(rng)
    for action in (AU, AD, AL, AR, A20):
        g = quat.random_unit(rng)
        assert act(action, g, Q).constraint_residual() < 1e-12


def test_action_identity_and_composition():
    rng = np.random.default_rng(1)
    Q = random_point(rng)
    assert np.allclose(act(AU, quat.ONE, Q).m, Q.m)
    for action in (AU, AD, AL, AR, A20):
        g, h = quat.random_unit(rng), quat.random_unit(rng)
        lhs = act(action, g, act(action, h, Q))
        rhs = act(action, qmul(g, h), Q)
        assert np.allclose(lhs.m, rhs.m, atol=1e-12)


def test_minus_one_a20_equals_al_ar():
    rng = np.random.default_rng(2)
    Q = random_point(rng)
    lhs = act(A20, -quat.ONE, Q)
    rhs = act(AL, -quat.ONE, act(AR, -quat.ONE, Q))
    assert np.allclose(lhs.m, rhs.m, atol=1e-13)


def test_unknown_action_kind_rejected():
    with pytest.raises(ValueError):
        ActionDescriptor("Ax")


def test_killing_field_a20_at_identity():
    K = killing_field(A20, quat.I, identity_point())
    assert np.allclose(K.c1, np.stack([quat.I, np.zeros(4)]))
    assert np.allclose(K.c2, np.stack([np.zeros(4), quat.I]))


def test_killing_field_matches_derivative_of_action():
    rng = np.random.default_rng(3)
    Q = random_point(rng)
    h = 1e-6
    for action in (AU, AD, AL, AR, A20):
        k = quat.random_unit_imaginary(rng)
        K = killing_field(action, k, Q)
        num = (
            act(action, quat.quat_exp(h * k), Q).m
            - act(action, quat.quat_exp(-h * k), Q).m
        ) / (2 * h)
        assert np.allclose(K.m, num, atol=1e-8)
        assert K.constraint_residual() < 1e-12


def test_al_ar_killing_fields_lie_in_v1_v2():
    rng = np.random.default_rng(4)
    for _ in range(20):
        Q = random_point(rng)
        k = quat.random_unit_imaginary(rng)
        c = tangent_coords(killing_field(AL, k, Q))
        assert np.linalg.norm(c[3:]) < 1e-10
        c = tangent_coords(killing_field(AR, k, Q))
        assert np.linalg.norm(c[:3]) < 1e-10 and np.linalg.norm(c[6:]) < 1e-10


def test_al_killing_b_length():
    rng = np.random.default_rng(5)
    Q = random_point(rng)
    k = 0.7 * quat.random_unit_imaginary(rng)
    K = killing_field(AL, k, Q)
    assert np.isclose(np.sqrt(binner(K.m, K.m)), qnorm(k) / np.sqrt(2))


def test_chart_basis_orthonormal():
    G = np.array([[binner(E, F) for F in CHART_BASIS] for E in CHART_BASIS])
    assert np.allclose(G, np.eye(10), atol=1e-14)


def test_splitting_gram_block_diagonal():
    rng = np.random.default_rng(6)
    Q = random_point(rng)
    S = splitting_at(Q)
    vecs = list(S.basisV1) + list(S.basisV2) + list(S.basisH)
    G = np.array([[binner(X.m, Y.m) for Y in vecs] for X in vecs])
    assert np.allclose(G, np.eye(10), atol=1e-12)
    assert len(S.basisH) == 4


def test_splitting_v1_at_identity():
    S = splitting_at(identity_point())
    for E, u in zip(S.basisV1, quat.IMAG_UNITS):
        assert np.allclose(E.m[0, 0], np.sqrt(2) * u)
        assert np.allclose(E.m[0, 1], 0) and np.allclose(E.m[1, :], 0)


def test_exp_chart_zero_and_invariants():
    rng = np.random.default_rng(7)
    Q = random_point(rng)
    assert np.allclose(exp_chart(Q, np.zeros(10)).m, Q.m, atol=1e-14)
    for _ in range(20):
        x = rng.uniform(-1, 1, 10)
        x = 0.5 * x / np.linalg.norm(x) * rng.uniform(0, 1)
        assert exp_chart(Q, x).constraint_residual() < 1e-12


def test_exp_chart_radius_guard():
    with pytest.raises(ValueError):
        exp_chart(identity_point(), np.full(10, 1.0))


def test_chart_frames_match_finite_differences():
    rng = np.random.default_rng(8)
    Q = random_point(rng)
    x = rng.uniform(-0.2, 0.2, 10)
    Pc, D = chart_points_and_frames(Q.complex(), x[None])
    h = 1e-6
    for i in range(10):
        e = np.zeros(10)
        e[i] = h
        num = (
            to_complex4(exp_chart(Q, x + e).m) - to_complex4(exp_chart(Q, x - e).m)
        ) / (2 * h)
        assert np.allclose(D[0, i], num, atol=1e-8)


def test_chart_frame_at_zero_is_left_translation():
    rng = np.random.default_rng(9)
    Q = random_point(rng)
    _, D = chart_points_and_frames(Q.complex(), np.zeros((1, 10)))
    for i, E in enumerate(CHART_BASIS):
        assert np.allclose(from_complex4(D[0, i]), mmul(Q.m, E), atol=1e-12)


def test_left_coords_roundtrip():
    rng = np.random.default_rng(10)
    Q = random_point(rng)
    c = rng.standard_normal(10)
    X = tangent_from_coords(Q, c)
    assert X.constraint_residual() < 1e-12
    assert np.allclose(tangent_coords(X), c, atol=1e-12)


def test_binner_complex_agrees():
    rng = np.random.default_rng(11)
    Q = random_point(rng)
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    assert np.isclose(binner(X.m, Y.m), binner_c(to_complex4(X.m), to_complex4(Y.m)))


def test_killing_coords_match_killing_field():
    rng = np.random.default_rng(12)
    Q = random_point(rng)
    Pc = Q.complex()
    for action in (AU, AD, AL, AR, A20):
        C = killing_coords(action, Pc)
        for i, u in enumerate(quat.IMAG_UNITS):
            K = killing_field(action, u, Q)
            assert np.allclose(C[i], tangent_coords(K), atol=1e-12)


def test_mconjT_unitary():
    rng = np.random.default_rng(13)
    Q = random_point(rng)
    assert np.allclose(mmul(mconjT(Q.m), Q.m), sp2.identity_mat(), atol=1e-12)
