"""Acceptance criteria for the laboratory, one test per criterion.

Each test prints a single summary line ``[criterion N] PASS/FAIL ...``
and asserts the stated tolerance.  The full-size scans are shared
between criteria through module-scoped fixtures.
"""

import math
import time

import numpy as np
import pytest

from sp2lab.metrics import MetricParams, SplitMetric
from sp2lab.curvature import (
    FLAT_THRESHOLD,
    riemann_at,
    vertizontal_curv,
)
from sp2lab.sp2 import tangent_from_coords
from sp2lab.submersions import CLOSED_PROJECTIONS, projection_residuals
from sp2lab.zerolocus import (
    TAG_FLAT_UNCLASSIFIED,
    TAG_POSITIVE,
    candidate_zero_planes,
    classify_plane_full,
    classify_plane_g_nu,
    scan_min_curvature,
    verify_flat_torus,
)
from sp2lab.verify import (
    _block_coords,
    _random_point,
    suite_basis6,
    suite_cheeger,
    suite_curvature3,
    suite_hopf4,
    suite_topo8,
)

PARAMS = MetricParams()  # default parameters (0.5, 0.5, 1.0, 1.0)
QUARTER = math.pi / 4


def _report(n, passed, detail):
    print(f"\n[criterion {n}] {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, f"criterion {n}: {detail}"


@pytest.fixture(scope="module")
def e20_scan():
    return scan_min_curvature(
        PARAMS, grid=(16, 16), restarts=20, seed=42, metric="full", space="e20"
    )


@pytest.fixture(scope="module")
def sp2_scans():
    out = {}
    for metric in ("split", "full"):
        out[metric] = scan_min_curvature(
            PARAMS, grid=(16, 16), restarts=20, seed=42, metric=metric, space="sp2"
        )
    return out


def test_criterion_01_oracle_concordance():
    """Closed-form curvature components vs the fd oracle: relative error
    <= 1e-4 on >= 500 samples over 5 random fiber-scale tuples."""
    t0 = time.time()
    rng = np.random.default_rng(1)
    worst = 0.0
    n = 0
    for _ in range(5):
        nu1, nu2 = rng.uniform(0.25, 0.7, 2)
        metric = SplitMetric(nu1, nu2)
        for _ in range(2):
            Q = _random_point(rng)
            d = riemann_at(metric, Q)
            for _ in range(50):
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
                n += 1
    # connection-metric rescaling rules (fiber scaling of one column)
    rules = suite_curvature3(seed=1, samples=50)
    rule_worst = max(
        c["max_residual"]
        for name, c in rules["checks"].items()
        if name.startswith("rule_") or name == "biinvariant_closed_form"
    )
    dt = time.time() - t0
    ok = worst <= 1e-4 and rules["passed"] and n >= 500 and dt < 300
    _report(
        1,
        ok,
        f"vertizontal rel err {worst:.2e} on {n} samples, "
        f"rule/biinvariant err {rule_worst:.2e}, {dt:.0f}s",
    )


def test_criterion_02_nonnegativity(sp2_scans):
    """16x16 grid, 20 restarts: minimum sectional curvature >= -1e-6 for
    both the fiber-scaled and the fully deformed metric."""
    t0 = time.time()
    mins = {name: rep.min_sec() for name, rep in sp2_scans.items()}
    ok = all(v >= -1e-6 for v in mins.values())
    _report(
        2,
        ok,
        f"min sec split={mins['split']:.2e} full={mins['full']:.2e} "
        f"({time.time() - t0:.0f}s beyond shared scan)",
    )


def test_criterion_03_zero_locus_exactness(e20_scan):
    """Grid minima <= 1e-8 under the deformed metric exactly at theta in
    {0, pi/4, pi/2, 3pi/4} or t = pi/4; off-locus minima exceed the
    calibrated threshold."""
    mismatches = [
        p for p in e20_scan.points if (p.min_sec <= 1e-8) != p.on_zero_locus
    ]
    off = [p.min_sec for p in e20_scan.points if not p.on_zero_locus]
    ok = (
        not mismatches
        and min(off) >= e20_scan.positivity_threshold
        and e20_scan.min_sec() >= -1e-6
    )
    _report(
        3,
        ok,
        f"{len(e20_scan.points)} points, {len(mismatches)} locus mismatches, "
        f"off-locus min {min(off):.2e} vs threshold "
        f"{e20_scan.positivity_threshold:.2e}",
    )


def test_criterion_04_classification_soundness(e20_scan):
    """>= 10^4 classified planes match fd-oracle signs with zero
    NumericallyFlatUnclassified outcomes."""
    rng = np.random.default_rng(4)
    metric = SplitMetric(PARAMS.nu1, PARAMS.nu2)
    mismatches = 0
    unclassified = 0
    n = 0
    for _ in range(5):
        Q = _random_point(rng)
        R = riemann_at(metric, Q)
        for _ in range(2000):
            kind = rng.integers(3)
            if kind == 0:
                C = rng.standard_normal((2, 10))
            elif kind == 1:
                C = np.stack(
                    [_block_coords(rng, "V1"), _block_coords(rng, "V2")]
                )
            else:
                C = np.stack(
                    [
                        _block_coords(rng, "H"),
                        _block_coords(rng, "V1") + _block_coords(rng, "V2"),
                    ]
                )
            plane = (
                tangent_from_coords(Q, C[0]),
                tangent_from_coords(Q, C[1]),
            )
            cl = classify_plane_g_nu(Q, plane, PARAMS)
            sec = R.sec(C[0], C[1])
            n += 1
            if cl.tag == TAG_FLAT_UNCLASSIFIED:
                unclassified += 1
            elif cl.tag == TAG_POSITIVE:
                mismatches += sec <= FLAT_THRESHOLD
            else:
                mismatches += abs(sec) > FLAT_THRESHOLD
    # downstairs: family planes and every scanned minimizer
    for theta, t in ((0.0, 0.15), (math.pi / 2, 0.15), (0.0, QUARTER)):
        for a, b, tag in candidate_zero_planes(theta, t, PARAMS):
            cl = classify_plane_full(theta, t, (a, b), PARAMS)
            n += 1
            mismatches += cl.tag != tag
    scan_unclassified = e20_scan.histogram.get(TAG_FLAT_UNCLASSIFIED, 0)
    n += len(e20_scan.points)
    ok = n >= 10**4 and mismatches == 0 and unclassified + scan_unclassified == 0
    _report(
        4,
        ok,
        f"{n} planes, {mismatches} sign mismatches, "
        f"{unclassified + scan_unclassified} unclassified",
    )


def test_criterion_05_projection_identities():
    """Closed-form orbit projections on a 64-point grid: residuals and
    zero sets to 1e-9, uniform recorded scale constants."""
    worst = 0.0
    worst_zero = 0.0
    for theta in np.linspace(0.0, math.pi, 8, endpoint=False):
        for t in np.linspace(0.0, QUARTER - 1e-3, 8):
            res = projection_residuals(theta, t, PARAMS.nu1, PARAMS.nu2)
            worst = max(worst, max(abs(r) for r in res.values()))
            for key, r in res.items():
                formula, scale, _conv = CLOSED_PROJECTIONS[key]
                if formula(theta, t) == 0.0:
                    worst_zero = max(worst_zero, abs(r))
    scales = {scale for _f, scale, _c in CLOSED_PROJECTIONS.values()}
    ok = worst <= 1e-9 and worst_zero <= 1e-9 and scales == {1.0, 0.5}
    _report(
        5,
        ok,
        f"max residual {worst:.2e}, zero-set residual {worst_zero:.2e}, "
        f"scales {sorted(scales)}",
    )


def test_criterion_06_hopf_A_tensor():
    """Closed-form Hopf A-tensor vs the numerical A-tensor at 100 random
    configurations to 1e-8."""
    r = suite_hopf4(seed=6, samples=100)
    worst = r["checks"]["hopf_A_closed_form"]["max_residual"]
    _report(6, r["passed"] and worst <= 1e-8, f"max deviation {worst:.2e} on 100 samples")


def test_criterion_07_horizontal_bases():
    """Seven-vector horizontal bases orthogonal to the quotient verticals
    to 1e-10 over a (theta, t) grid, with matching t -> pi/4 limits."""
    r = suite_basis6(params=MetricParams(0.45, 0.52), seed=7)
    worst = r["checks"]["orthogonality_to_verticals"]["max_residual"]
    _report(
        7,
        r["passed"] and worst <= 1e-10,
        f"orthogonality {worst:.2e}, quarter limit "
        f"{r['checks']['quarter_limit_of_eta']['max_residual']:.2e} "
        "(per unit of pi/4 - t)",
    )


def test_criterion_08_flat_torus():
    """|sec| <= 1e-8 at 64 points along the integrated torus swept by
    the x-direction and first theta-direction under the deformed metric."""
    out = verify_flat_torus(PARAMS, samples=64, seed=0)
    ok = out["samples"] >= 64 and out["max_abs_sec"] <= 1e-8 and out[
        "controls_positive"
    ]
    _report(
        8,
        ok,
        f"max |sec| {out['max_abs_sec']:.2e} at {out['samples']} points, "
        f"controls {out['control_off_locus_sec']:.2e} / "
        f"{out['control_perturbed_sec']:.2e}",
    )


def test_criterion_09_topology():
    """H3 of the unit tangent bundle is Z/2 with H0 = H7 = Z and all
    other groups zero; the transition identity holds on 10^4 samples."""
    r = suite_topo8(samples=10**4, seed=9)
    worst = r["checks"]["transition_identity"]["max_residual"]
    _report(
        9,
        r["passed"] and worst <= 1e-12,
        f"homology report ok, transition residual {worst:.2e} on 10^4 samples",
    )


def test_criterion_10_cheeger_machinery():
    """Deformation commutativity to 1e-10, large-scale recovery to
    1e-10, and isometry invariance of the deformed metric under all five
    circle-compatible actions to 1e-9."""
    r = suite_cheeger(params=PARAMS, seed=10, samples=10)
    c = r["checks"]
    comm = max(
        c["deformation_commutativity"]["max_residual"],
        c["joint_equals_nested"]["max_residual"],
    )
    rec = c["large_scale_recovery"]["max_residual"]
    iso = max(
        v["max_residual"] for k, v in c.items() if k.startswith("isometry")
    )
    ok = r["passed"] and comm <= 1e-10 and rec <= 1e-10 and iso <= 1e-9
    _report(
        10,
        ok,
        f"commutativity {comm:.2e}, recovery {rec:.2e}, isometry {iso:.2e}",
    )
