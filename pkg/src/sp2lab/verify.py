"""Named verification suites bundling the library's closed-form checks.

Each suite runs a group of related identities against the independent
finite-difference curvature oracle (or exact integer computation, for
the topology suite) and returns a machine-readable result::

    {"suite": name,
     "passed": bool,
     "checks": {check_name: {"status": "pass" | "fail",
                             "max_residual": float,
                             "tolerance": float, ...}}}

The suites are sized for interactive use; the acceptance tests run the
same checks at full sample counts.
"""

import math

import numpy as np

from . import quat
from .sp2 import (
    A20,
    AD,
    AL,
    AR,
    AU,
    H_IDX,
    V1_IDX,
    V2_IDX,
    act_tangent,
    exp_chart,
    representative_point,
    tangent_from_coords,
)
from .metrics import (
    INF,
    Biinvariant,
    CheegerDeformed,
    MetricParams,
    SplitMetric,
    full_metric,
)
from .curvature import (
    FLAT_THRESHOLD,
    biinvariant_riemann,
    connection_metric_components,
    hopf_A,
    riemann_at,
    s7_vertical_basis,
    vertizontal_A2,
    vertizontal_curv,
)
from .submersions import (
    HOPF,
    Q20,
    numerical_A,
    projection_residuals,
    q20_horizontal_basis,
    vertical_space,
)
from .zerolocus import (
    TAG_FLAT_UNCLASSIFIED,
    TAG_POSITIVE,
    candidate_zero_planes,
    classify_plane_full,
    classify_plane_g_nu,
    grid_points,
    scan_min_curvature,
    verify_flat_torus,
    zero_locus_membership,
)
from .topology import homology_E, transition_identity_check

QUARTER = math.pi / 4
SQH = 1.0 / math.sqrt(2.0)

ALL_ACTIONS = (("A_u", AU), ("A_d", AD), ("A_l", AL), ("A_r", AR), ("A_20", A20))


def _random_point(rng):
    Q = representative_point(
        rng.uniform(0.0, math.pi - 0.01), rng.uniform(0.0, QUARTER)
    )
    x = rng.uniform(-0.4, 0.4, 10)
    x = 0.45 * x / max(1.0, np.linalg.norm(x) / 0.45)
    return exp_chart(Q, x)


def _check(residual, tol, **extra):
    out = {
        "status": "pass" if residual <= tol else "fail",
        "max_residual": float(residual),
        "tolerance": float(tol),
    }
    out.update(extra)
    return out


def _block_coords(rng, which):
    c = np.zeros(10)
    sl = {"V1": V1_IDX, "V2": V2_IDX, "H": H_IDX}[which]
    c[sl] = rng.standard_normal(sl.stop - sl.start)
    return c


# ---------------------------------------------------------------------------
# suites

def suite_cheeger(params=None, seed=0, samples=6):
    """Cheeger deformation machinery: commutativity, large-scale
    recovery, and isometry invariance of the deformed metric."""
    params = params or MetricParams()
    rng = np.random.default_rng([seed, 101])
    base = SplitMetric(params.nu1, params.nu2)
    checks = {}

    a, b = 0.8, 1.3
    m_ud = CheegerDeformed(CheegerDeformed(base, [(AU, a)]), [(AD, b)])
    m_du = CheegerDeformed(CheegerDeformed(base, [(AD, b)]), [(AU, a)])
    m_joint = CheegerDeformed(base, [(AU, a), (AD, b)])
    m_large = CheegerDeformed(base, [(AU, 1e6)])
    worst_order = worst_joint = worst_large = 0.0
    for _ in range(samples):
        Pc = _random_point(rng).complex()[None]
        g_ud = m_ud.coord_matrix(Pc)[0]
        g_du = m_du.coord_matrix(Pc)[0]
        g_j = m_joint.coord_matrix(Pc)[0]
        g_b = base.coord_matrix(Pc)[0]
        worst_order = max(worst_order, np.abs(g_ud - g_du).max())
        worst_joint = max(worst_joint, np.abs(g_ud - g_j).max())
        worst_large = max(worst_large, np.abs(m_large.coord_matrix(Pc)[0] - g_b).max())
    checks["deformation_commutativity"] = _check(worst_order, 1e-10)
    checks["joint_equals_nested"] = _check(worst_joint, 1e-10)
    checks["large_scale_recovery"] = _check(worst_large, 1e-10, scale=1e6)

    inf_params = MetricParams(params.nu1, params.nu2, INF, INF)
    checks["infinite_scale_identity"] = _check(
        0.0 if isinstance(full_metric(inf_params), SplitMetric) else 1.0, 0.0
    )

    metric = full_metric(params)
    for name, action in ALL_ACTIONS:
        worst = 0.0
        for _ in range(samples):
            Q = _random_point(rng)
            X = tangent_from_coords(Q, rng.standard_normal(10))
            Y = tangent_from_coords(Q, rng.standard_normal(10))
            g = quat.random_unit(rng)
            lhs = metric.inner(act_tangent(action, g, X), act_tangent(action, g, Y))
            worst = max(worst, abs(lhs - metric.inner(X, Y)))
        checks[f"isometry_invariance_{name}"] = _check(worst, 1e-9)
    return _finish("cheeger", checks)


def suite_curvature3(seed=0, samples=100, nu_tuples=5, points_per_tuple=4):
    """Closed-form curvature components against the fd oracle."""
    rng = np.random.default_rng([seed, 103])
    checks = {}

    worst = 0.0
    Q = _random_point(rng)
    d = riemann_at(Biinvariant(), Q)
    for _ in range(samples):
        x, y, z, w = rng.standard_normal((4, 10))
        fd = d.curv4(x, y, z, w)
        cf = biinvariant_riemann(x, y, z, w)
        worst = max(worst, abs(fd - cf) / max(1e-2, abs(cf)))
    checks["biinvariant_closed_form"] = _check(worst, 1e-4)

    worst = 0.0
    n_done = 0
    per_point = max(1, samples // (nu_tuples * points_per_tuple))
    for _ in range(nu_tuples):
        nu1, nu2 = rng.uniform(0.25, 0.7, 2)
        metric = SplitMetric(nu1, nu2)
        for _ in range(points_per_tuple):
            Q = _random_point(rng)
            d = riemann_at(metric, Q)
            for _ in range(per_point):
                cz = _block_coords(rng, "H")
                c1 = _block_coords(rng, "V1")
                c2 = _block_coords(rng, "V2")
                cf = vertizontal_curv(
                    tangent_from_coords(Q, cz),
                    tangent_from_coords(Q, c1),
                    tangent_from_coords(Q, c2),
                    nu1,
                    nu2,
                )
                fd = d.curv4(cz, c1 + c2, c1 + c2, cz)
                worst = max(worst, abs(cf - fd) / max(1e-2, abs(cf)))
                n_done += 1
    checks["vertizontal_closed_form"] = _check(worst, 1e-4, samples=n_done)

    # connection-metric rescaling rules against two fd tensors
    nu1, nu2 = 0.45, 0.38
    t_scale = math.sqrt(2.0) * nu2
    Q = _random_point(rng)
    d_t = riemann_at(SplitMetric(nu1, nu2), Q)
    d_1 = riemann_at(SplitMetric(nu1, SQH), Q)
    worst_hv = worst_vv = worst_hhhv = 0.0
    for _ in range(10):
        cz, cs = _block_coords(rng, "H"), _block_coords(rng, "V2")
        A = vertizontal_A2(
            tangent_from_coords(Q, cz), tangent_from_coords(Q, cs), SQH
        )
        from .sp2 import binner

        rhs = connection_metric_components(
            t_scale, "hv", A_norm_sq=binner(A.m, A.m)
        )
        worst_hv = max(
            worst_hv, abs(d_t.curv4(cz, cs, cs, cz) - rhs) / max(1e-2, abs(rhs))
        )
        s, tau = _block_coords(rng, "V2"), _block_coords(rng, "V2")
        rhs = connection_metric_components(
            t_scale, "vv", sec_fiber=d_1.curv4(s, tau, tau, s)
        )
        worst_vv = max(
            worst_vv, abs(d_t.curv4(s, tau, tau, s) - rhs) / max(1e-2, abs(rhs))
        )
        e1 = _block_coords(rng, "H") + _block_coords(rng, "V1")
        e2 = _block_coords(rng, "H") + _block_coords(rng, "V1")
        Z = _block_coords(rng, "H") + _block_coords(rng, "V1")
        rhs = connection_metric_components(
            t_scale, "hhhv", R=d_1.curv4(e1, e2, Z, cs)
        )
        worst_hhhv = max(
            worst_hhhv,
            abs(d_t.curv4(e1, e2, Z, cs) - rhs) / max(1e-1, abs(rhs)),
        )
    checks["rule_vertizontal_scaling"] = _check(worst_hv, 1e-4)
    checks["rule_fiber_scaling"] = _check(worst_vv, 1e-4)
    checks["rule_three_horizontal_scaling"] = _check(worst_hhhv, 1e-3)
    return _finish("curvature3", checks)


def suite_hopf4(seed=0, samples=100):
    """Hopf A-tensor closed form against the numerical A-tensor."""
    rng = np.random.default_rng([seed, 104])
    worst = 0.0
    for _ in range(samples):
        N = rng.standard_normal((2, 4))
        N /= np.linalg.norm(N)
        z = rng.standard_normal((2, 4))
        for f in [N] + list(s7_vertical_basis(N)):
            z = z - (np.sum(f * z) / np.sum(f * f)) * f
        beta = quat.random_unit_imaginary(rng)
        sigma = np.stack([quat.qmul(N[0], beta), quat.qmul(N[1], beta)])
        closed = hopf_A(z, beta, N)
        num = numerical_A(HOPF, None, z, sigma, N)
        worst = max(worst, float(np.abs(closed - num).max()))
    return _finish("hopf4", {"hopf_A_closed_form": _check(worst, 1e-8, samples=samples)})


def suite_zeros5(params=None, seed=0, samples=200, points=4):
    """Plane classifier for the fiber-scaled metric against fd signs."""
    params = params or MetricParams()
    rng = np.random.default_rng([seed, 105])
    metric = SplitMetric(params.nu1, params.nu2)
    mismatches = 0
    unclassified = 0
    worst_zero = 0.0
    n = 0
    for _ in range(points):
        Q = _random_point(rng)
        R = riemann_at(metric, Q)
        for _ in range(samples // points):
            kind = rng.integers(3)
            if kind == 0:
                C = rng.standard_normal((2, 10))
            elif kind == 1:  # guaranteed vertizontal-zero configuration
                C = np.stack([
                    _block_coords(rng, "V1"),
                    _block_coords(rng, "V2"),
                ])
            else:  # degenerate-projection candidates: line + verticals
                C = np.stack([
                    _block_coords(rng, "H"),
                    _block_coords(rng, "V1") + _block_coords(rng, "V2"),
                ])
            plane = (tangent_from_coords(Q, C[0]), tangent_from_coords(Q, C[1]))
            cl = classify_plane_g_nu(Q, plane, params)
            sec = R.sec(C[0], C[1])
            n += 1
            if cl.tag == TAG_FLAT_UNCLASSIFIED:
                unclassified += 1
            elif cl.tag == TAG_POSITIVE:
                if sec <= FLAT_THRESHOLD:
                    mismatches += 1
            else:
                worst_zero = max(worst_zero, abs(sec))
                if abs(sec) > FLAT_THRESHOLD:
                    mismatches += 1
    checks = {
        "sign_agreement": _check(float(mismatches), 0.0, samples=n),
        "no_unclassified": _check(float(unclassified), 0.0),
        "zero_planes_flat": _check(worst_zero, FLAT_THRESHOLD),
    }
    return _finish("zeros5", checks)


def suite_basis6(params=None, seed=0):
    """Horizontal basis orthogonality and its t -> pi/4 limit."""
    params = params or MetricParams(0.45, 0.52)
    metric = SplitMetric(params.nu1, params.nu2)
    worst = 0.0
    for theta in (0.0, 0.4, 1.2, 2.2, 2.9):
        for t in (0.0, 0.1, 0.3, 0.6, QUARTER):
            basis = q20_horizontal_basis(theta, t, params)
            V = vertical_space(Q20, basis.at)
            worst = max(
                worst,
                max(abs(metric.inner(X, K)) for X in basis.all_seven() for K in V),
            )
    checks = {"orthogonality_to_verticals": _check(worst, 1e-10)}

    from .sp2 import tangent_coords

    worst = 0.0
    limit = q20_horizontal_basis(0.0, QUARTER, params)
    for eps in (1e-4, 1e-5):
        near = q20_horizontal_basis(0.0, QUARTER - eps, params)
        for name in ("eta1", "eta2"):
            e = tangent_coords(getattr(near, name))
            e /= np.linalg.norm(e)
            ref = tangent_coords(getattr(limit, name))
            ref /= np.linalg.norm(ref)
            worst = max(
                worst,
                min(np.linalg.norm(e - ref), np.linalg.norm(e + ref)) / eps,
            )
    # the renormalized eta directions converge linearly in (pi/4 - t)
    checks["quarter_limit_of_eta"] = _check(worst, 50.0)
    return _finish("basis6", checks)


def suite_locus7(params=None, seed=0, grid=(4, 4), restarts=6, torus_samples=16):
    """Zero-locus structure: projection identities, flat families,
    locus-exact scan, and the flat torus."""
    params = params or MetricParams()
    checks = {}

    worst = 0.0
    for theta in np.linspace(0.0, math.pi, 8, endpoint=False):
        for t in np.linspace(0.0, QUARTER - 1e-3, 8):
            res = projection_residuals(theta, t, params.nu1, params.nu2)
            worst = max(worst, max(abs(r) for r in res.values()))
    checks["projection_identities"] = _check(worst, 1e-9, grid=64)

    worst = 0.0
    mislabels = 0
    n = 0
    for theta, t in ((0.0, 0.15), (math.pi / 2, 0.15), (0.0, QUARTER), (0.7, QUARTER)):
        for a, b, tag in candidate_zero_planes(theta, t, params):
            cl = classify_plane_full(theta, t, (a, b), params)
            worst = max(worst, abs(cl.sec))
            if cl.tag != tag:
                mislabels += 1
            n += 1
    checks["family_planes_flat"] = _check(worst, FLAT_THRESHOLD, planes=n)
    checks["family_planes_tagged"] = _check(float(mislabels), 0.0, planes=n)

    rep = scan_min_curvature(
        params, grid=grid, restarts=restarts, seed=seed, metric="full", space="e20"
    )
    locus_err = 0
    off_min = math.inf
    for p in rep.points:
        flat = p.min_sec <= FLAT_THRESHOLD
        if flat != p.on_zero_locus:
            locus_err += 1
        if not p.on_zero_locus:
            off_min = min(off_min, p.min_sec)
    checks["scan_nonnegative"] = _check(max(0.0, -rep.min_sec()), 1e-6)
    checks["scan_locus_exact"] = _check(float(locus_err), 0.0, grid=list(grid))
    checks["scan_off_locus_above_threshold"] = _check(
        0.0 if off_min >= rep.positivity_threshold else 1.0,
        0.0,
        off_locus_min=off_min,
        threshold=rep.positivity_threshold,
    )
    hist = rep.histogram
    checks["scan_no_unclassified"] = _check(
        float(hist.get(TAG_FLAT_UNCLASSIFIED, 0)), 0.0, histogram=dict(hist)
    )

    torus = verify_flat_torus(params, samples=torus_samples, seed=seed)
    checks["flat_torus"] = _check(
        torus["max_abs_sec"], FLAT_THRESHOLD, samples=torus["samples"]
    )
    checks["flat_torus_controls"] = _check(
        0.0 if torus["controls_positive"] else 1.0, 0.0
    )
    return _finish("locus7", checks)


def suite_topo8(samples=10000, seed=0):
    """Bundle topology: homology of E_{2,0} and the transition identity."""
    rep = homology_E(2, 0)
    ok = (
        rep.free_ranks == (1, 0, 0, 0, 0, 0, 0, 1)
        and rep.torsion[3] == (2,)
        and all(rep.torsion[q] == () for q in range(8) if q != 3)
        and rep.pi3_order == 2
    )
    checks = {
        "homology_E20": _check(0.0 if ok else 1.0, 0.0, report=rep.to_dict()),
    }
    out = transition_identity_check(samples=samples, seed=seed)
    checks["transition_identity"] = _check(
        max(out["transition"], out["chart_constraint"], out["orbit_invariance"],
            out["roundtrip"]),
        1e-12,
        samples=samples,
    )
    return _finish("topo8", checks)


def _finish(name, checks):
    return {
        "suite": name,
        "passed": all(c["status"] == "pass" for c in checks.values()),
        "checks": checks,
    }


SUITES = {
    "cheeger": lambda params, seed: suite_cheeger(params=params, seed=seed),
    "curvature3": lambda params, seed: suite_curvature3(seed=seed),
    "hopf4": lambda params, seed: suite_hopf4(seed=seed),
    "zeros5": lambda params, seed: suite_zeros5(params=params, seed=seed),
    "basis6": lambda params, seed: suite_basis6(params=params, seed=seed),
    "locus7": lambda params, seed: suite_locus7(params=params, seed=seed),
    "topo8": lambda params, seed: suite_topo8(seed=seed),
}


def run_suites(names, params=None, seed=0):
    """Run the named suites (or all of them) and combine the results."""
    params = params or MetricParams()
    if "all" in names:
        names = list(SUITES)
    results = {n: SUITES[n](params, seed) for n in names}
    return {
        "passed": all(r["passed"] for r in results.values()),
        "suites": results,
    }
