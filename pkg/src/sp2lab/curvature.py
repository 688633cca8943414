"""Curvature of Sp(2): finite-difference oracle and closed forms.

Three independent routes to curvature components:

* a finite-difference oracle that differentiates the metric components
  in the exponential chart (works for every metric in the family),
* the Lie-theoretic formula for the biinvariant metric, and
* closed forms for vertizontal curvatures of g_{nu1, nu2} built from
  the Hopf A-tensor.

Sign convention: the round sphere (and every plane of a biinvariant
metric) has nonnegative sectional curvature; a calibration check runs
once on first use and aborts if the convention is violated.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import quat
from .quat import qconj, qmul
from .sp2 import (
    CHART_BASIS,
    CHART_BASIS_C,
    H_IDX,
    Sp2Point,
    TangentVec,
    V1_IDX,
    V2_IDX,
    binner,
    chart_points_and_frames,
    identity_point,
    left_coords,
    mmul,
    tangent_coords,
    tangent_from_coords,
)

# Central differences with one Richardson pass leave an O(h^4) truncation
# error but an O(eps / h^2) roundoff floor; 4e-3 balances the two at
# ~1e-9 absolute error on flat planes.
FD_STEP = 4e-3
FLAT_THRESHOLD = 1e-8


# ---------------------------------------------------------------------------
# finite-difference Riemann tensor

def _stencil(h):
    """Coordinates of the 201-point stencil: center, axis pairs, cross pairs."""
    xs = [np.zeros(10)]
    axis = {}
    for j in range(10):
        for s in (1, -1):
            axis[(j, s)] = len(xs)
            e = np.zeros(10)
            e[j] = s * h
            xs.append(e)
    cross = {}
    for j in range(10):
        for k in range(j + 1, 10):
            for sj in (1, -1):
                for sk in (1, -1):
                    cross[(j, k, sj, sk)] = len(xs)
                    e = np.zeros(10)
                    e[j] = sj * h
                    e[k] = sk * h
                    xs.append(e)
    return np.stack(xs), axis, cross


def _metric_field(metric, Qc, xs):
    """Metric component matrices g_ij(x) in the chart frame, batched over xs."""
    P, D = chart_points_and_frames(Qc, xs)
    C = left_coords(P, D)  # (N, 10, 10): row i = chart coords of frame D_i
    Gm = metric.coord_matrix(P)
    return C @ Gm @ np.swapaxes(C, -1, -2)


def _riemann_single_step(metric, Qc, h):
    xs, axis, cross = _stencil(h)
    g = _metric_field(metric, Qc, xs)
    g0 = g[0]
    dg = np.empty((10, 10, 10))
    ddg = np.empty((10, 10, 10, 10))
    for a in range(10):
        p, m = g[axis[(a, 1)]], g[axis[(a, -1)]]
        dg[a] = (p - m) / (2 * h)
        ddg[a, a] = (p - 2 * g0 + m) / (h * h)
    for a in range(10):
        for b in range(a + 1, 10):
            val = (
                g[cross[(a, b, 1, 1)]]
                - g[cross[(a, b, 1, -1)]]
                - g[cross[(a, b, -1, 1)]]
                + g[cross[(a, b, -1, -1)]]
            ) / (4 * h * h)
            ddg[a, b] = val
            ddg[b, a] = val

    ginv = np.linalg.inv(g0)
    # Christoffel symbols of the first and second kind at the center:
    # G1[c, a, b] = (d_a g_bc + d_b g_ac - d_c g_ab) / 2
    G1 = 0.5 * (np.einsum("acb->cab", dg) + np.einsum("bac->cab", dg) - dg)
    G2 = np.einsum("lc,cab->lab", ginv, G1)
    # dG1[d, c, a, b] = d_d Gamma_{c, ab}
    dG1 = 0.5 * (
        np.einsum("dabc->dcab", ddg) + np.einsum("dbac->dcab", ddg) - ddg
    )
    dginv = -np.einsum("lm,dmn,nc->dlc", ginv, dg, ginv)
    dG2 = np.einsum("dlc,cab->dlab", dginv, G1) + np.einsum("lc,dcab->dlab", ginv, dG1)
    # R(d_a, d_b) d_c = (d_a G^l_{bc} - d_b G^l_{ac} + G^l_{am} G^m_{bc}
    #                    - G^l_{bm} G^m_{ac}) d_l; this convention makes the
    # round sphere's sectional curvature positive.
    Rup = (
        np.einsum("albc->abcl", dG2)
        - np.einsum("blac->abcl", dG2)
        + np.einsum("lam,mbc->abcl", G2, G2)
        - np.einsum("lbm,mac->abcl", G2, G2)
    )
    return np.einsum("abcm,ml->abcl", Rup, g0), g0


@dataclass(frozen=True)
class RiemannData:
    """Riemann tensor of a metric at a point, in the left-invariant chart frame.

    R[a, b, c, d] = <R(E_a, E_b) E_c, E_d>; G is the metric Gram matrix.
    richardson_gap records the disagreement between the two step levels.
    """

    Q: Sp2Point
    R: np.ndarray
    G: np.ndarray
    step: float
    richardson_gap: float

    def curv4(self, x, y, z, w):
        """<R(x, y) z, w> for left-invariant coordinate vectors."""
        return float(np.einsum("abcd,a,b,c,d->", self.R, x, y, z, w))

    def sec_unnormalized(self, x, y):
        return self.curv4(x, y, y, x)

    def sec(self, x, y):
        """Sectional curvature of span{x, y} (normalized by the Gram determinant)."""
        gxx = float(x @ self.G @ x)
        gyy = float(y @ self.G @ y)
        gxy = float(x @ self.G @ y)
        denom = gxx * gyy - gxy * gxy
        if denom < 1e-14:
            raise ValueError("vectors are linearly dependent")
        return self.curv4(x, y, y, x) / denom


_RIEMANN_CACHE = {}
_SIGN_CHECKED = False


def _calibrate_sign():
    """Verify the sign convention once: biinvariant planes must satisfy
    sec(X, Y) = |[X, Y]|^2 / 4 >= 0."""
    global _SIGN_CHECKED
    if _SIGN_CHECKED:
        return
    from .metrics import Biinvariant

    Q = identity_point()
    data = _riemann_raw(Biinvariant(), Q, FD_STEP)
    x = np.zeros(10)
    y = np.zeros(10)
    x[0] = 1.0  # V1 direction
    y[6] = 1.0  # H direction
    fd = data.sec_unnormalized(x, y)
    exact = 0.25 * _bracket_norm_sq(x, y)
    if exact <= 0 or abs(fd - exact) > 1e-4 * exact:
        raise AssertionError(
            f"curvature sign calibration failed: fd={fd:.6g}, closed={exact:.6g}"
        )
    _SIGN_CHECKED = True


def _riemann_raw(metric, Q, h):
    Qc = Q.complex()
    R1, g0 = _riemann_single_step(metric, Qc, h)
    R2, _ = _riemann_single_step(metric, Qc, h / 2)
    R = (4.0 * R2 - R1) / 3.0
    gap = float(np.max(np.abs(R2 - R1)))
    return RiemannData(Q=Q, R=R, G=g0, step=h, richardson_gap=gap)


def riemann_at(metric, Q, h=FD_STEP):
    """Cached finite-difference Riemann tensor of ``metric`` at ``Q``."""
    _calibrate_sign()
    key = (metric.key, Q.m.tobytes(), h)
    data = _RIEMANN_CACHE.get(key)
    if data is None:
        data = _riemann_raw(metric, Q, h)
        _RIEMANN_CACHE[key] = data
    return data


def fd_riemann(metric, Q, X, Y, Z, W, h=FD_STEP):
    """<R(X, Y) Z, W> by finite differences in the exponential chart."""
    data = riemann_at(metric, Q, h)
    return data.curv4(
        tangent_coords(X), tangent_coords(Y), tangent_coords(Z), tangent_coords(W)
    )


def fd_sectional(metric, Q, X, Y, h=FD_STEP):
    """Normalized sectional curvature of span{X, Y} under ``metric``."""
    return riemann_at(metric, Q, h).sec(tangent_coords(X), tangent_coords(Y))


# ---------------------------------------------------------------------------
# biinvariant closed form

def _coords_to_lie(x):
    """Left-invariant coordinate vector -> Lie algebra element (4x4 complex)."""
    return np.einsum("i,ijk->jk", np.asarray(x, float), CHART_BASIS_C)


def _lie_to_coords(A):
    return 0.25 * np.real(np.einsum("ikj,jk->i", np.conj(CHART_BASIS_C).transpose(0, 2, 1), A))


def lie_bracket_coords(x, y):
    """Bracket [X, Y] of left-invariant fields, in chart coordinates."""
    X, Y = _coords_to_lie(x), _coords_to_lie(y)
    return _lie_to_coords(X @ Y - Y @ X)


def _bracket_norm_sq(x, y):
    b = lie_bracket_coords(x, y)
    return float(b @ b)


def biinvariant_riemann(x, y, z, w):
    """<R(X,Y)Z,W> = -b([X,Y],[Z,W])/4 for the biinvariant metric.

    Arguments are left-invariant chart coordinate vectors; the sign is
    chosen so that sec(X, Y) = |[X, Y]|^2 / 4 >= 0.
    """
    bxy = lie_bracket_coords(x, y)
    bzw = lie_bracket_coords(z, w)
    return -0.25 * float(bxy @ bzw)


def biinvariant_sec_unnormalized(x, y):
    return 0.25 * _bracket_norm_sq(x, y)


# ---------------------------------------------------------------------------
# Hopf A-tensor on S^7

def s7_vertical_basis(N):
    """Vertical space of the Hopf map at N = (n1, n2): span{N i, N j, N k}."""
    N = np.asarray(N, float)
    return np.stack([np.stack([qmul(N[0], u), qmul(N[1], u)]) for u in quat.IMAG_UNITS])


def s7_vertical_residual(N, z):
    """Norm of the component of z along the Hopf fiber directions at N."""
    V = s7_vertical_basis(N)
    return float(np.linalg.norm(np.einsum("vij,ij->v", V, np.asarray(z, float))))


def hopf_A(z, beta, N):
    """A-tensor of the Hopf fibration: A_z (N beta) = z beta.

    N is a point of S^7 as a pair of quaternions, z a horizontal tangent
    vector at N, beta a purely imaginary quaternion.
    """
    z = np.asarray(z, float)
    beta = np.asarray(beta, float)
    if abs(beta[0]) > 1e-13:
        raise ValueError("beta must be purely imaginary")
    if s7_vertical_residual(N, z) > 1e-8 * max(1.0, np.linalg.norm(z)):
        raise ValueError("z is not horizontal for the Hopf map at N")
    return np.stack([qmul(z[0], beta), qmul(z[1], beta)])


# ---------------------------------------------------------------------------
# connection-metric rescaling rules

def connection_metric_components(t, rule, **vals):
    """Curvature of a connection metric with fibers scaled by t.

    Rules (keyword arguments consumed per rule):

    * ``"hh_A"``      A_t(e1, e2)    = A(e1, e2)                 [A_hh]
    * ``"hv_A"``      A_t(e1, sigma) = t^2 A(e1, sigma)          [A_hv]
    * ``"hh"``        sec_t(e1, e2)  = sec_B - 3 t^2 |A(e1,e2)|^2  [sec_base, A_norm_sq]
    * ``"vv"``        sec_t(sigma, tau) = t^2 sec(sigma, tau)    [sec_fiber]
    * ``"hv"``        sec_t(e1, sigma)  = t^4 |A(e1, sigma)|^2   [A_norm_sq]
    * ``"vvvh"``      <R_t(sigma,tau)U, e1> = 0
    * ``"hhhv"``      <R_t(e1,e2)Z, sigma> = t^2 <R(e1,e2)Z, sigma>  [R]
    """
    t2 = t * t
    if rule == "hh_A":
        return vals["A_hh"]
    if rule == "hv_A":
        return t2 * vals["A_hv"]
    if rule == "hh":
        return vals["sec_base"] - 3.0 * t2 * vals["A_norm_sq"]
    if rule == "vv":
        return t2 * vals["sec_fiber"]
    if rule == "hv":
        return t2 * t2 * vals["A_norm_sq"]
    if rule == "vvvh":
        return 0.0
    if rule == "hhhv":
        return t2 * vals["R"]
    raise ValueError(f"unknown rule {rule!r}")


# ---------------------------------------------------------------------------
# vertizontal curvature of g_{nu1, nu2}

def project_H(Q, pair):
    """b-orthogonal projection of an ambient column pair onto H at Q."""
    c = np.zeros(10)
    for i in range(6, 10):
        c[i] = binner(pair, mmul(Q.m, CHART_BASIS[i]))
    return tangent_from_coords(Q, c)


def vertizontal_A1(z, v1, nu1):
    """A^1_z v^1: the Hopf A-tensor in the first column, H-projected.

    z must lie in H and v1 in V1 at the common point; the result is the
    tangent vector 2 nu1^2 (z1 beta1, 0)^H with beta1 = N1bar . v1_col1.
    """
    Q = z.at
    N1 = Q.m[:, 0]
    beta1 = qmul(qconj(N1[0]), v1.m[0, 0]) + qmul(qconj(N1[1]), v1.m[1, 0])
    z1 = z.m[:, 0]
    pair = np.zeros((2, 2, 4))
    pair[:, 0] = np.stack([qmul(z1[0], beta1), qmul(z1[1], beta1)])
    return 2.0 * nu1 * nu1 * project_H(Q, pair)


def vertizontal_A2(z, v2, nu2):
    """A^2_z v^2: the Hopf A-tensor in the second column, H-projected."""
    Q = z.at
    N2 = Q.m[:, 1]
    beta2 = qmul(qconj(N2[0]), v2.m[0, 1]) + qmul(qconj(N2[1]), v2.m[1, 1])
    z2 = z.m[:, 1]
    pair = np.zeros((2, 2, 4))
    pair[:, 1] = np.stack([qmul(z2[0], beta2), qmul(z2[1], beta2)])
    return 2.0 * nu2 * nu2 * project_H(Q, pair)


def _check_block(X, idx, name):
    c = tangent_coords(X)
    mask = np.ones(10, bool)
    mask[idx] = False
    if np.linalg.norm(c[mask]) > 1e-8 * max(1.0, np.linalg.norm(c)):
        raise ValueError(f"vector is not in {name}")


def vertizontal_curv(z, v1, v2, nu1, nu2):
    """curv(z, v1 + v2) under g_{nu1, nu2} for z in H, v1 in V1, v2 in V2.

    Equals |A^1_z v1 + A^2_z v2|^2 under the biinvariant metric (the
    H-block of g_{nu1, nu2} is unrescaled).
    """
    _check_block(z, H_IDX, "H")
    _check_block(v1, V1_IDX, "V1")
    _check_block(v2, V2_IDX, "V2")
    A = vertizontal_A1(z, v1, nu1) + vertizontal_A2(z, v2, nu2)
    return binner(A.m, A.m)
