"""Riemannian-submersion calculus for the five fibrations in play.

Covers the Hopf map h on S^7, the column projections p21 / p2_2 of
Sp(2), the quotient q20 by the diagonal left action, and the bundle
projection p20 downstream of q20.  Provides vertical spaces, numerical
O'Neill A- and T-tensors by chart differentiation, the base sectional
curvature via the O'Neill formula, and the explicit horizontal frame of
q20 at the canonical orbit representatives.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quat
from .sp2 import (
    A20,
    AL,
    AR,
    AU,
    DEFAULT_FRAME,
    Sp2Point,
    TangentVec,
    binner,
    chart_points_and_frames,
    killing_coords,
    killing_field,
    left_coords,
    mmul,
    representative_point,
    so2_matrix,
    tangent_coords,
    tangent_from_coords,
)
from .metrics import MetricParams, SplitMetric
from .curvature import fd_sectional, hopf_A, s7_vertical_basis

SUBMERSION_NAMES = ("h", "p21", "p2_2", "q20", "p20")

A_STEP = 1e-4


@dataclass(frozen=True)
class SubmersionDescriptor:
    """One of the five fibrations; the vertical space is the orbit
    distribution of ``action`` (None for the Hopf map, whose fibers are
    quaternion lines)."""

    name: str

    def __post_init__(self):
        if self.name not in SUBMERSION_NAMES:
            raise ValueError(f"unknown submersion {self.name!r}")

    @property
    def action(self):
        return {
            "p21": AR,   # kills the second column: fibers are A^r orbits
            "p2_2": AL,
            "q20": A20,
            "p20": AL,   # A^l descends to the quotient; this is its lift
        }.get(self.name)


HOPF = SubmersionDescriptor("h")
P21 = SubmersionDescriptor("p21")
P2_2 = SubmersionDescriptor("p2_2")
Q20 = SubmersionDescriptor("q20")
P20 = SubmersionDescriptor("p20")


def vertical_space(sub, Q):
    """Basis of the 3-dimensional vertical space at Q.

    For the Hopf map Q is a point of S^7 as a (2, 4) quaternion pair and
    the result is the (3, 2, 4) stack (Qi, Qj, Qk); otherwise Q is an
    Sp2Point and the result is a list of three killing TangentVecs.
    """
    if sub.name == "h":
        return s7_vertical_basis(np.asarray(Q, float))
    return [killing_field(sub.action, u, Q) for u in quat.IMAG_UNITS]


def vertical_residual(sub, metric, X):
    """Largest metric inner product of X against the unit vertical basis."""
    V = vertical_space(sub, X.at)
    worst = 0.0
    for K in V:
        n = metric.norm(K)
        worst = max(worst, abs(metric.inner(X, K)) / n)
    return worst


# ---------------------------------------------------------------------------
# numerical A- and T-tensors by chart differentiation

def _chart_system(metric, action, Qc, h):
    """Metric, killing and frame data on the 21-point first-derivative stencil.

    Returns (G, K, C) with G (21, 10, 10) the metric in the left frame,
    K (21, 3, 10) the killing coordinates and C (21, 10, 10) the matrix
    of left-frame coordinates of the chart coordinate frame d/dx_i.
    The center point is index 0; point 1 + 2a + s is the offset +/- h
    along axis a (s = 0 plus, s = 1 minus).
    """
    xs = np.zeros((21, 10))
    for a in range(10):
        xs[1 + 2 * a, a] = h
        xs[2 + 2 * a, a] = -h
    P, D = chart_points_and_frames(Qc, xs)
    G = metric.coord_matrix(P)
    K = killing_coords(action, P)
    C = left_coords(P, D)
    return G, K, C


def _vertical_coefficients(G, K, l):
    """Solve for m with K^T m the G-vertical part of the left-frame vector l."""
    return np.linalg.solve(K @ G @ np.swapaxes(K, -1, -2), K @ G @ l[..., None])[..., 0]


def _field_chart_components(G, K, C, y0, extension):
    """Chart components over the stencil of the extension of y0.

    ``extension`` is "horizontal" (project the coordinate-constant field
    G-orthogonally to the killing fields at every stencil point) or
    "killing" (extend by the same killing-field combination everywhere).
    """
    if extension == "killing":
        m = np.linalg.lstsq(K[0].T, y0, rcond=None)[0]
        l = np.einsum("pmi,m->pi", K, m)
    else:
        l = np.einsum("pmi,m->pi", C, y0)  # coordinate-constant field
        mv = _vertical_coefficients(G, K, l)
        l = l - np.einsum("pmi,pm->pi", K, mv)
    # chart components c solve C^T c = l pointwise
    return np.linalg.solve(np.swapaxes(C, -1, -2), l[..., None])[..., 0]


def _covariant_derivative(metric, action, Q, X, Y, extension, h=A_STEP):
    """nabla_X Ytilde at Q, in the left frame, for the chosen extension of Y."""
    Qc = Q.complex()
    G, K, C = _chart_system(metric, action, Qc, h)
    x0 = tangent_coords(X)
    y0 = tangent_coords(Y)
    c = _field_chart_components(G, K, C, y0, extension)
    Gch = C @ G @ np.swapaxes(C, -1, -2)  # metric in the chart coordinate frame
    dg = np.stack([(Gch[1 + 2 * a] - Gch[2 + 2 * a]) / (2 * h) for a in range(10)])
    dc = np.stack([(c[1 + 2 * a] - c[2 + 2 * a]) / (2 * h) for a in range(10)])
    Gamma1 = 0.5 * (
        np.einsum("acb->cab", dg) + np.einsum("bac->cab", dg) - dg
    )
    Gamma = np.einsum("cd,dab->cab", np.linalg.inv(Gch[0]), Gamma1)
    return x0 @ dc + np.einsum("cab,a,b->c", Gamma, x0, c[0]), G, K


def _split_vertical(G, K, r):
    m = _vertical_coefficients(G[0], K[0], r)
    v = K[0].T @ m
    return v, r - v


def numerical_A(sub, metric, X, Y, Q, h=A_STEP):
    """O'Neill A-tensor value A_X Y by chart differentiation.

    X must be horizontal for ``sub`` under ``metric``.  If Y is
    horizontal the result is the vertical part of nabla_X Ytilde for a
    horizontally-projected extension; if Y is vertical, the horizontal
    part of the derivative of its killing extension.
    """
    if sub.name == "h":
        return _hopf_numerical_A(X, Y, Q)
    if vertical_residual(sub, metric, X) > 1e-6 * max(1.0, metric.norm(X)):
        raise ValueError("X is not horizontal for the submersion")
    y_vert = vertical_residual(sub, metric, Y) > 1e-6 * max(1.0, metric.norm(Y))
    ext = "killing" if y_vert else "horizontal"
    r, G, K = _covariant_derivative(metric, sub.action, Q, X, Y, ext, h)
    v, hpart = _split_vertical(G, K, r)
    return tangent_from_coords(Q, v if not y_vert else hpart)


def numerical_T(sub, metric, sigma, tau, Q, h=A_STEP):
    """O'Neill T-tensor value T_sigma tau (both arguments vertical)."""
    r, G, K = _covariant_derivative(metric, sub.action, Q, sigma, tau, "killing", h)
    _, hpart = _split_vertical(G, K, r)
    return tangent_from_coords(Q, hpart)


def _hopf_numerical_A(z, w, N):
    """A-tensor of the Hopf map on the round S^7, from the ambient derivative.

    z must be horizontal at N.  For vertical w = N beta the value is the
    horizontal projection of the great-circle derivative of M -> M beta;
    for horizontal w it is the vertical vector determined by
    skew-adjointness against the fiber directions.
    """
    z = np.asarray(z, float)
    w = np.asarray(w, float)
    N = np.asarray(N, float)
    V = s7_vertical_basis(N)
    coeffs = np.einsum("vij,ij->v", V, w)
    if np.linalg.norm(coeffs) > 1e-8 * max(1.0, np.linalg.norm(w)):
        # vertical argument: w = sum coeffs_u N u
        zn = np.linalg.norm(z.reshape(-1))
        u = z / zn
        eps = 1e-6
        vals = []
        for s in (eps, -eps):
            M = math.cos(s) * N + math.sin(s) * u
            vals.append(np.einsum("v,vij->ij", coeffs, s7_vertical_basis(M)))
        d = zn * (vals[0] - vals[1]) / (2 * eps)
        d = d - np.einsum("ij,ij->", d, N) * N  # tangential part
        d = d - np.einsum("v,vij->ij", np.einsum("vij,ij->v", V, d), V)
        return d
    out = np.zeros_like(N)
    for u, Nu in zip(quat.IMAG_UNITS, V):
        zu = np.stack([quat.qmul(z[0], u), quat.qmul(z[1], u)])
        out = out - np.einsum("ij,ij->", zu, w) * Nu
    return out


def oneill_base_sectional(sub, metric, X, Y, Q, h=None):
    """Sectional curvature downstairs of the span of the horizontal X, Y.

    O'Neill: sec_base = sec_total + 3 |A_X Y|^2 for an orthonormal pair.
    For the Hopf map the total space is the round S^7 (sec = 1) and the
    Euclidean metric of R^8 is used.
    """
    if sub.name == "h":
        z = np.asarray(X, float)
        w = np.asarray(Y, float)
        w = w - np.einsum("ij,ij->", z, w) / np.einsum("ij,ij->", z, z) * z
        z /= np.linalg.norm(z.reshape(-1))
        w /= np.linalg.norm(w.reshape(-1))
        A = _hopf_numerical_A(z, w, Q)
        return 1.0 + 3.0 * float(np.einsum("ij,ij->", A, A))
    # metric-orthonormalize
    X = X * (1.0 / metric.norm(X))
    Y = Y - X * metric.inner(X, Y)
    Y = Y * (1.0 / metric.norm(Y))
    kwargs = {} if h is None else {"h": h}
    total = fd_sectional(metric, Q, X, Y, **kwargs)
    A = numerical_A(sub, metric, X, Y, Q)
    return total + 3.0 * metric.inner(A, A)


# ---------------------------------------------------------------------------
# the horizontal frame of q20 along the canonical orbit representatives

def _pair(c1_top, c1_bot, c2_top, c2_bot):
    return np.stack([np.stack([c1_top, c2_top]), np.stack([c1_bot, c2_bot])])


def frame_pairs(theta, t, frame=DEFAULT_FRAME):
    """The four horizontal frame pairs x, y, eta1, eta2 at N(theta, t).

    Values are recorded at theta = 0 along the two-column S^7 frame and
    carried along the SO(2) orbit by left multiplication.
    """
    al, g1, g2 = frame.alpha, frame.gamma1, frame.gamma2
    ct, st = np.cos(t), np.sin(t)
    R = so2_matrix(theta)
    x = _pair(-st * quat.ONE, ct * al, ct * al, -st * quat.ONE)
    y = _pair(st * al, ct * quat.ONE, -ct * quat.ONE, -st * al)
    e1 = _pair(-st * g1, ct * g2, ct * g2, -st * g1)
    e2 = _pair(-st * g2, -ct * g1, -ct * g1, -st * g2)
    return {k: mmul(R, v) for k, v in (("x", x), ("y", y), ("eta1", e1), ("eta2", e2))}


def v1_generator(Q, beta):
    """The V1 vector (N1 beta, 0) at Q (beta purely imaginary)."""
    m = np.zeros((2, 2, 4))
    m[0, 0] = quat.qmul(Q.m[0, 0], beta)
    m[1, 0] = quat.qmul(Q.m[1, 0], beta)
    return TangentVec(m, Q)


def v2_generator(Q, beta):
    """The V2 vector (0, N2 beta) at Q."""
    m = np.zeros((2, 2, 4))
    m[0, 1] = quat.qmul(Q.m[0, 1], beta)
    m[1, 1] = quat.qmul(Q.m[1, 1], beta)
    return TangentVec(m, Q)


QUARTER = math.pi / 4


def _is_quarter(t):
    return abs(t - QUARTER) < 1e-12


@dataclass(frozen=True)
class HorizontalBasis:
    """The seven-vector horizontal frame of q20 at a representative point.

    x20, y20, eta1, eta2 span the horizontal space of p20 (lifted);
    frakv, theta1, theta2 span its vertical space.  At t = pi/4 the
    eta slots degenerate to pure V2 directions and two extra horizontal
    vectors appear (see ``t_quarter_extras``).
    """

    x20: TangentVec
    y20: TangentVec
    eta1: TangentVec
    eta2: TangentVec
    frakv: TangentVec
    theta1: TangentVec
    theta2: TangentVec
    at: Sp2Point
    params: MetricParams

    def horizontal_four(self):
        return (self.x20, self.y20, self.eta1, self.eta2)

    def vertical_three(self):
        return (self.frakv, self.theta1, self.theta2)

    def all_seven(self):
        return self.horizontal_four() + self.vertical_three()

    @property
    def degenerate(self):
        """True at t = pi/4 where the eta pairs leave the frame."""
        Q = self.at
        n10 = np.linalg.norm(Q.m[0, 0])
        return abs(n10 - math.sqrt(0.5)) < 1e-9

    def t_quarter_extras(self, frame=DEFAULT_FRAME):
        """The additional horizontal vectors (theta_i / nu1^2, 0) at t = pi/4."""
        if not self.degenerate:
            raise ValueError("extras exist only at t = pi/4")
        s = 1.0 / self.params.nu1**2
        return (
            v1_generator(self.at, frame.gamma1) * s,
            v1_generator(self.at, frame.gamma2) * s,
        )


def _gate_check(basis, nu1, nu2, tol=1e-8):
    m = SplitMetric(nu1, nu2)
    V = vertical_space(Q20, basis.at)
    worst = 0.0
    for X in basis.all_seven():
        for K in V:
            worst = max(worst, abs(m.inner(X, K)))
    if worst > tol:
        raise RuntimeError(
            f"horizontal frame reconstruction failed: vertical residual {worst:.3e}"
        )


@lru_cache(maxsize=512)
def _basis_cached(theta, t, nu1, nu2):
    Q = representative_point(theta, t)
    F = frame_pairs(theta, t)
    inv1, inv2 = 1.0 / nu1**2, 1.0 / nu2**2
    al, g1, g2 = DEFAULT_FRAME.alpha, DEFAULT_FRAME.gamma1, DEFAULT_FRAME.gamma2
    if _is_quarter(t):
        eta1 = v2_generator(Q, g1) * inv2
        eta2 = v2_generator(Q, g2) * inv2
    else:
        tn = np.tan(2.0 * t) * inv2
        eta1 = TangentVec(F["eta1"], Q) + v2_generator(Q, g1) * tn
        eta2 = TangentVec(F["eta2"], Q) + v2_generator(Q, g2) * tn
    basis = HorizontalBasis(
        x20=TangentVec(F["x"], Q),
        y20=TangentVec(F["y"], Q),
        eta1=eta1,
        eta2=eta2,
        frakv=v1_generator(Q, al) * (-inv1) + v2_generator(Q, al) * inv2,
        theta1=v1_generator(Q, g1) * (-inv1) + v2_generator(Q, g1) * inv2,
        theta2=v1_generator(Q, g2) * (-inv1) + v2_generator(Q, g2) * inv2,
        at=Q,
        params=MetricParams(nu1, nu2),
    )
    _gate_check(basis, nu1, nu2)
    _identity_gate(theta, t, nu1, nu2, basis)
    return basis


def q20_horizontal_basis(theta, t, params):
    """The seven-vector basis of the q20 horizontal space at N(theta, t).

    Orthogonality to the quotient verticals under g_{nu1, nu2} is checked
    on construction along with the closed-form orbit projections; failure
    raises RuntimeError.
    """
    return _basis_cached(float(theta), float(t), params.nu1, params.nu2)


# ---------------------------------------------------------------------------
# orbit projections

def orbit_projection_gram(vecs, action, Q, metric=None):
    """Matrix of inner products of vecs against the orbit's killing
    basis, and its numerical rank.

    ``metric`` defaults to the biinvariant form.  When deciding whether a
    Cheeger deformation turns a plane positively curved, pass the base
    metric of the deformation: with unequal fiber scales the biinvariant
    rank can disagree with the base-metric rank, and only the latter
    predicts positivity.
    """
    K = [killing_field(action, u, Q) for u in quat.IMAG_UNITS]
    if metric is None:
        M = np.array([[binner(v.m, k.m) for k in K] for v in vecs])
    else:
        M = np.array([[metric.inner(v, k) for k in K] for v in vecs])
    s = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(s > 1e-8 * max(1.0, s[0] if len(s) else 0.0)))
    return M, rank


# Closed forms of the projections of the frame onto the A^u orbit at
# N(theta, t).  Each entry records (generator, formula, scale, metric):
# the measured inner product equals scale * formula under the biinvariant
# form ("b") or under g_{nu1, nu2} ("g").  Scales come from the two inner
# product normalizations used in the source computations.
CLOSED_PROJECTIONS = {
    ("eta_pair", "gamma1"): (lambda th, t: -0.5 * np.sin(2 * t), 1.0, "b"),
    ("eta_pair", "gamma2"): (lambda th, t: 0.5 * np.sin(2 * th) * np.cos(2 * t), 1.0, "b"),
    ("eta_pair", "alpha"): (lambda th, t: 0.0, 1.0, "b"),
    ("theta_diff", "gamma1"): (lambda th, t: -np.cos(2 * th), 0.5, "b"),
    ("theta_diff", "gamma2"): (lambda th, t: 0.0, 0.5, "b"),
    ("theta_diff", "alpha"): (lambda th, t: 0.0, 0.5, "b"),
    ("eta20", "gamma2"): (
        lambda th, t: 0.5 * np.sin(2 * th) * (np.cos(2 * t) + np.tan(2 * t) * np.sin(2 * t)),
        1.0,
        "g",
    ),
    ("eta20", "alpha"): (lambda th, t: 0.0, 1.0, "b"),
    ("x20", "alpha"): (lambda th, t: 0.5 * np.sin(2 * th), 1.0, "b"),
    ("x20", "gamma1"): (lambda th, t: 0.0, 1.0, "b"),
    ("x20", "gamma2"): (lambda th, t: 0.0, 1.0, "b"),
    ("y20", "alpha"): (lambda th, t: 0.5 * np.sin(2 * t) * np.cos(2 * th), 1.0, "b"),
    ("y20", "gamma1"): (lambda th, t: 0.0, 1.0, "b"),
    ("y20", "gamma2"): (lambda th, t: 0.0, 1.0, "b"),
}


def _projection_vectors(theta, t, nu1, nu2, basis=None):
    Q = representative_point(theta, t) if basis is None else basis.at
    F = frame_pairs(theta, t)
    vecs = {
        "x20": TangentVec(F["x"], Q),
        "y20": TangentVec(F["y"], Q),
        "eta_pair": TangentVec(F["eta1"], Q),
        "theta_diff": v1_generator(Q, DEFAULT_FRAME.gamma1) * (-1.0)
        + v2_generator(Q, DEFAULT_FRAME.gamma1),
    }
    if not _is_quarter(t):
        tn = np.tan(2.0 * t) / nu2**2
        vecs["eta20"] = vecs["eta_pair"] + v2_generator(Q, DEFAULT_FRAME.gamma1) * tn
    return Q, vecs


def projection_residuals(theta, t, nu1, nu2):
    """Residuals of every closed-form orbit projection at N(theta, t)."""
    Q, vecs = _projection_vectors(theta, t, nu1, nu2)
    gens = {
        "alpha": DEFAULT_FRAME.alpha,
        "gamma1": DEFAULT_FRAME.gamma1,
        "gamma2": DEFAULT_FRAME.gamma2,
    }
    g = SplitMetric(nu1, nu2)
    out = {}
    for (vname, gname), (formula, scale, conv) in CLOSED_PROJECTIONS.items():
        if vname not in vecs:
            continue  # eta20 is undefined at t = pi/4
        U = killing_field(AU, gens[gname], Q)
        got = g.inner(vecs[vname], U) if conv == "g" else binner(vecs[vname].m, U.m)
        out[(vname, gname)] = got - scale * formula(theta, t)
    return out


def _identity_gate(theta, t, nu1, nu2, basis, tol=1e-9):
    worst = max(abs(r) for r in projection_residuals(theta, t, nu1, nu2).values())
    if worst > tol:
        raise RuntimeError(
            f"frame fails the closed-form orbit projections: residual {worst:.3e}"
        )
