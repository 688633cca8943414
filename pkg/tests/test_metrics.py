import math

import numpy as np
import pytest

from sp2lab import quat
from sp2lab.sp2 import (
    AL,
    AR,
    AU,
    AD,
    A20,
    act_tangent,
    binner,
    killing_field,
    mmul,
    representative_point,
    splitting_at,
    tangent_coords,
    tangent_from_coords,
    TangentVec,
)
from sp2lab.metrics import (
    INF,
    Biinvariant,
    CheegerDeformed,
    MetricParams,
    SplitMetric,
    biinvariant_inner,
    cheeger_deform,
    cheeger_horizontal_correspondence,
    full_metric,
    l_of_nu,
    nu_of_l,
    split_inner,
)
from tests.test_sp2 import random_point, random_tangent

SQH = 1.0 / math.sqrt(2.0)


def test_params_validation():
    MetricParams(0.5, 0.5, 1.0, INF)
    with pytest.raises(ValueError):
        MetricParams(nu1=0.9)
    with pytest.raises(ValueError):
        MetricParams(nu2=0.0)
    with pytest.raises(ValueError):
        MetricParams(l1u=-1.0)


def test_biinvariant_killing_length():
    rng = np.random.default_rng(0)
    Q = random_point(rng)
    X = killing_field(AL, quat.I, Q)
    assert np.isclose(biinvariant_inner(X, X), 0.5)


def test_biinvariant_v1_v2_orthogonal():
    rng = np.random.default_rng(1)
    S = splitting_at(random_point(rng))
    for X in S.basisV1:
        for Y in S.basisV2:
            assert abs(biinvariant_inner(X, Y)) < 1e-14


def test_biinvariant_left_invariance():
    rng = np.random.default_rng(2)
    Q, g = random_point(rng), random_point(rng)
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    val = binner(X.m, Y.m)
    assert np.isclose(binner(mmul(g.m, X.m), mmul(g.m, Y.m)), val)


def test_split_recovers_biinvariant():
    rng = np.random.default_rng(3)
    Q = random_point(rng)
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    m = split_inner(SQH, SQH)
    assert np.isclose(m.inner(X, Y), biinvariant_inner(X, Y))


def test_split_killing_length_is_nu():
    rng = np.random.default_rng(4)
    Q = random_point(rng)
    m = split_inner(0.31, 0.47)
    assert np.isclose(m.norm(killing_field(AL, quat.I, Q)), 0.31)
    assert np.isclose(m.norm(killing_field(AR, quat.J, Q)), 0.47)


def test_split_fixes_horizontal():
    rng = np.random.default_rng(5)
    S = splitting_at(random_point(rng))
    m = split_inner(0.3, 0.4)
    for X in S.basisH:
        for Y in S.basisH:
            assert np.isclose(m.inner(X, Y), biinvariant_inner(X, Y))


def test_mismatched_base_points_rejected():
    rng = np.random.default_rng(6)
    Q1, Q2 = random_point(rng), random_point(rng)
    with pytest.raises(ValueError):
        biinvariant_inner(random_tangent(rng, Q1), random_tangent(rng, Q2))


def test_cheeger_large_l_recovers_base():
    rng = np.random.default_rng(7)
    Q = random_point(rng)
    base = split_inner(0.4, 0.5)
    m = cheeger_deform(base, AU, 1e6)
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    assert np.isclose(m.inner(X, Y), base.inner(X, Y), rtol=1e-10)


def test_cheeger_infinite_l_is_identity():
    base = split_inner(0.4, 0.5)
    assert cheeger_deform(base, AU, INF) is base


def test_calibration_nu_of_l():
    """Deforming b by A^l at scale l rescales V1 by nu(l)*sqrt(2)."""
    rng = np.random.default_rng(8)
    Q = random_point(rng)
    for l in (0.3, 1.0, 2.5):
        m = cheeger_deform(Biinvariant(), AL, l)
        ref = split_inner(nu_of_l(l), SQH)
        X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
        assert np.isclose(m.inner(X, Y), ref.inner(X, Y), rtol=1e-10)
        assert np.isclose(l_of_nu(nu_of_l(l)), l)


def test_cheeger_fixes_orbit_orthogonal_directions():
    rng = np.random.default_rng(9)
    Q = random_point(rng)
    S = splitting_at(Q)
    base = Biinvariant()
    m = cheeger_deform(base, AL, 0.8)
    for Z in S.basisH + S.basisV2:  # all orthogonal to the A^l orbit
        assert np.isclose(m.inner(Z, Z), base.inner(Z, Z), rtol=1e-12)


def test_full_metric_order_independence():
    rng = np.random.default_rng(10)
    Q = random_point(rng)
    base = split_inner(0.4, 0.45)
    ud = CheegerDeformed(CheegerDeformed(base, [(AU, 0.9)]), [(AD, 1.3)])
    du = CheegerDeformed(CheegerDeformed(base, [(AD, 1.3)]), [(AU, 0.9)])
    joint = CheegerDeformed(base, [(AU, 0.9), (AD, 1.3)])
    Pc = Q.complex()[None]
    M1, M2, M3 = ud.coord_matrix(Pc), du.coord_matrix(Pc), joint.coord_matrix(Pc)
    assert np.allclose(M1, M2, atol=1e-10)
    assert np.allclose(M1, M3, atol=1e-10)


def test_full_metric_infinite_scales_is_split():
    rng = np.random.default_rng(11)
    Q = random_point(rng)
    m = full_metric(MetricParams(0.4, 0.45, INF, INF))
    ref = split_inner(0.4, 0.45)
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    assert np.isclose(m.inner(X, Y), ref.inner(X, Y))


@pytest.mark.parametrize("action", [AU, AD, AL, AR, A20])
def test_full_metric_isometry_invariance(action):
    rng = np.random.default_rng(12)
    Q = random_point(rng)
    m = full_metric(MetricParams(0.4, 0.45, 0.8, 1.2))
    X, Y = random_tangent(rng, Q), random_tangent(rng, Q)
    val = m.inner(X, Y)
    g = quat.random_unit(rng)
    moved = m.inner(act_tangent(action, g, X), act_tangent(action, g, Y))
    assert np.isclose(moved, val, rtol=1e-9)


def test_positive_definiteness_random_params():
    rng = np.random.default_rng(13)
    for _ in range(10):
        params = MetricParams(
            rng.uniform(0.1, SQH),
            rng.uniform(0.1, SQH),
            rng.uniform(0.2, 3.0),
            rng.uniform(0.2, 3.0),
        )
        m = full_metric(params)
        Pc = np.stack([random_point(rng).complex() for _ in range(20)])
        G = m.coord_matrix(Pc)
        assert np.allclose(G, np.swapaxes(G, -1, -2), atol=1e-12)
        assert np.linalg.eigvalsh(G).min() > 1e-6


def test_monotone_in_l_on_killing_directions():
    rng = np.random.default_rng(14)
    Q = random_point(rng)
    Z = killing_field(AU, quat.I, Q)
    base = split_inner(0.4, 0.45)
    vals = [cheeger_deform(base, AU, l).inner(Z, Z) for l in (0.2, 0.5, 1.0, 3.0, 50.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= base.inner(Z, Z) + 1e-9


def test_lift_orthogonal_vector_has_zero_moment():
    rng = np.random.default_rng(15)
    Q = random_point(rng)
    S = splitting_at(Q)
    lift = cheeger_horizontal_correspondence(Biinvariant(), AL, 0.7, S.basisH[0])
    assert np.allclose(lift.a, 0.0, atol=1e-12)
    assert np.allclose(lift.X.m, S.basisH[0].m, atol=1e-12)


def test_lift_killing_vector_rescaling():
    """On killing directions the deformation scales lengths by l/sqrt(l^2+lam2^2)."""
    rng = np.random.default_rng(16)
    Q = random_point(rng)
    Z = killing_field(AL, quat.I, Q)
    l = 0.9
    lift = cheeger_horizontal_correspondence(Biinvariant(), AL, l, Z)
    assert np.isclose(lift.lam2, SQH)
    m = cheeger_deform(Biinvariant(), AL, l)
    factor = l / math.sqrt(l * l + lift.lam2**2)
    assert np.isclose(m.norm(Z), factor * math.sqrt(biinvariant_inner(Z, Z)))


def test_lift_is_horizontal_in_product():
    """(a, Z - K_a) is orthogonal to every (-k, K_k) in l^2 b_unit + base."""
    rng = np.random.default_rng(17)
    Q = random_point(rng)
    base = split_inner(0.4, 0.45)
    Z = random_tangent(rng, Q)
    l = 1.1
    lift = cheeger_horizontal_correspondence(base, AU, l, Z)
    for i, u in enumerate(quat.IMAG_UNITS):
        K = killing_field(AU, u, Q)
        k = np.zeros(3)
        k[i] = 1.0
        val = l * l * float(lift.a @ (-k)) + base.inner(lift.X, K)
        assert abs(val) < 1e-10


def test_joint_lift_agrees_with_factorwise():
    rng = np.random.default_rng(18)
    Q = random_point(rng)
    base = split_inner(0.4, 0.45)
    Z = random_tangent(rng, Q)
    joint = CheegerDeformed(base, [(AU, 0.9), (AD, 1.3)])
    a, ka = joint.lift(Z)
    # horizontality against each factor separately
    for idx, (action, l) in enumerate(joint.actions):
        for i, u in enumerate(quat.IMAG_UNITS):
            K = killing_field(action, u, Q)
            X = Z - tangent_from_coords(Q, ka)
            val = -l * l * a[3 * idx + i] + base.inner(X, K)
            assert abs(val) < 1e-10
