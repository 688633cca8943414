"""Metrics on Sp(2): biinvariant, split-scaled, and Cheeger-deformed.

Every metric exposes two evaluation surfaces:

* ``inner(X, Y)`` on :class:`~sp2lab.sp2.TangentVec` pairs at a common
  point, and
* ``coord_matrix(Pc)`` returning the 10x10 Gram matrix of the metric in
  the left-invariant chart frame, batched over points given in the
  complex embedding.  The finite-difference curvature engine consumes
  only this second surface.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sp2 import (
    AL,
    AR,
    AU,
    AD,
    H_IDX,
    V1_IDX,
    V2_IDX,
    TangentVec,
    killing_coords,
    tangent_coords,
    tangent_from_coords,
)

INF = math.inf

SQRT_HALF = 1.0 / math.sqrt(2.0)


def _is_inf(l):
    return l == INF


@dataclass(frozen=True)
class MetricParams:
    """Parameter tuple (nu1, nu2, l1u, l1d); math.inf means no deformation."""

    nu1: float = 0.5
    nu2: float = 0.5
    l1u: float = 1.0
    l1d: float = 1.0

    def __post_init__(self):
        for name in ("nu1", "nu2"):
            nu = getattr(self, name)
            if not (0.0 < nu <= SQRT_HALF + 1e-12):
                raise ValueError(f"{name} must lie in (0, 1/sqrt(2)]; got {nu}")
        for name in ("l1u", "l1d"):
            l = getattr(self, name)
            if not (l > 0.0):
                raise ValueError(f"{name} must be positive or inf; got {l}")


class MetricEvaluator:
    """Base class: a point-dependent inner product on tangent vectors."""

    @property
    def key(self):
        """Hashable identity of the metric, used to cache curvature tensors."""
        raise NotImplementedError

    def coord_matrix(self, Pc):
        """Gram matrices (B, 10, 10) in the chart frame at points Pc (B, 4, 4)."""
        raise NotImplementedError

    def coord_matrix_single(self, Pc):
        return self.coord_matrix(Pc[None])[0]

    def inner(self, X, Y):
        if not np.allclose(X.at.m, Y.at.m, atol=1e-12):
            raise ValueError("tangent vectors live at different points")
        G = self.coord_matrix_single(X.at.complex())
        return float(tangent_coords(X) @ G @ tangent_coords(Y))

    def norm(self, X):
        return math.sqrt(self.inner(X, X))

    def gram(self, vecs):
        at = vecs[0].at
        G = self.coord_matrix_single(at.complex())
        C = np.stack([tangent_coords(v) for v in vecs])
        return C @ G @ C.T


class Biinvariant(MetricEvaluator):
    """The biinvariant metric b_{1/sqrt2}; identity matrix in the chart frame."""

    @property
    def key(self):
        return ("b",)

    def coord_matrix(self, Pc):
        B = np.asarray(Pc).shape[0]
        return np.broadcast_to(np.eye(10), (B, 10, 10)).copy()


class SplitMetric(MetricEvaluator):
    """g_{nu1, nu2}: rescales V1 and V2, fixes H.

    A V1 killing field of unit-quaternion generator has length nu1.
    nu1 = nu2 = 1/sqrt(2) recovers the biinvariant metric.
    """

    def __init__(self, nu1, nu2):
        self.nu1 = float(nu1)
        self.nu2 = float(nu2)
        d = np.ones(10)
        d[V1_IDX] = 2.0 * self.nu1**2
        d[V2_IDX] = 2.0 * self.nu2**2
        self._diag = d

    @property
    def key(self):
        return ("split", self.nu1, self.nu2)

    def coord_matrix(self, Pc):
        B = np.asarray(Pc).shape[0]
        return np.broadcast_to(np.diag(self._diag), (B, 10, 10)).copy()


class CheegerDeformed(MetricEvaluator):
    """Cheeger deformation of a base metric by one or more S^3 actions.

    For actions with killing bases K (rows of coords), the deformed Gram
    matrix is  l^2 A^T A + (I - K^T A)^T G_base (I - K^T A)  with
    A = (K G K^T + L^2)^(-1) K G_base, L^2 the block-diagonal of the
    squared scales.  The Lie-algebra basis of each S^3 factor is
    (i, j, k) under the unit biinvariant metric.
    """

    def __init__(self, base, actions):
        # actions: list of (ActionDescriptor, scale); infinite scales are dropped
        self.base = base
        self.actions = [(a, float(l)) for a, l in actions if not _is_inf(l)]

    @property
    def key(self):
        return ("cheeger", self.base.key, tuple((a.kind, l) for a, l in self.actions))

    def _system(self, Pc):
        """Killing coordinate stack K (B, 3n, 10) and scale matrix L2 (3n, 3n)."""
        Ks = [killing_coords(a, Pc) for a, _ in self.actions]
        K = np.concatenate(Ks, axis=-2)
        L2 = np.repeat([l * l for _, l in self.actions], 3)
        return K, np.diag(L2)

    def coord_matrix(self, Pc):
        Pc = np.asarray(Pc)
        Gb = self.base.coord_matrix(Pc)
        if not self.actions:
            return Gb
        K, L2 = self._system(Pc)
        G = K @ Gb @ np.swapaxes(K, -1, -2)
        A = np.linalg.solve(G + L2, K @ Gb)
        P = np.eye(10) - np.swapaxes(K, -1, -2) @ A
        return np.swapaxes(A, -1, -2) @ L2 @ A + np.swapaxes(P, -1, -2) @ Gb @ P

    def lift(self, Z):
        """Cheeger horizontal lift of a tangent vector at its point."""
        Pc = Z.at.complex()
        Gb = self.base.coord_matrix_single(Pc)
        K, L2 = self._system(Pc[None])
        K = K[0]
        z = tangent_coords(Z)
        a = np.linalg.solve(K @ Gb @ K.T + L2, K @ Gb @ z)
        return a, K.T @ a

    def correspondence(self, Z):
        """Map a base-horizontal vector to the deformed-horizontal one.

        Write Z = z + K^T m with z base-orthogonal to the deforming orbit
        and m the orbit coefficients.  The vector

            C(Z) = z + K^T L^{-2} (K G_b K^T + L^2) m

        spans, together with the verticals of any submersion commuting
        with the deforming actions, the same quotient tangent direction
        as Z, but is horizontal with respect to the deformed metric.
        With no finite-scale actions C is the identity.
        """
        if not self.actions:
            return Z
        Pc = Z.at.complex()
        Gb = self.base.coord_matrix_single(Pc)
        K, L2 = self._system(Pc[None])
        K = K[0]
        z = tangent_coords(Z)
        Gk = K @ Gb @ K.T
        m = np.linalg.solve(Gk, K @ Gb @ z)
        zperp = z - K.T @ m
        corrected = zperp + K.T @ np.linalg.solve(L2, (Gk + L2) @ m)
        return tangent_from_coords(Z.at, corrected)


@dataclass(frozen=True)
class CheegerLift:
    """Horizontal lift (a, X) of a tangent vector through a Cheeger quotient."""

    a: np.ndarray  # (3n,) Lie-algebra coefficients over (i, j, k) per factor
    X: TangentVec  # Z - K_a, the M-component of the lift
    lam1: float  # deformation scale l
    lam2: float  # common base length of unit killing directions (nan if anisotropic)


def cheeger_horizontal_correspondence(base, action, l, Z):
    """Horizontal lift of Z for the deformation of ``base`` by ``action``.

    The lift (a, Z - K_a) is orthogonal to every vertical vector
    (-k, K_k) of the diagonal quotient of (S^3, l^2 b_unit) x (Sp(2), base).
    """
    dm = CheegerDeformed(base, [(action, l)])
    if not dm.actions:
        a = np.zeros(3)
        ka = np.zeros(10)
    else:
        a, ka = dm.lift(Z)
    Q = Z.at
    X = Z - tangent_from_coords(Q, ka)
    K = killing_coords(action, Q.complex())
    Gb = base.coord_matrix_single(Q.complex())
    Gk = K @ Gb @ K.T
    mean = np.trace(Gk) / 3.0
    lam2 = math.sqrt(mean) if np.allclose(Gk, mean * np.eye(3), atol=1e-10) else math.nan
    return CheegerLift(a=a, X=X, lam1=float(l), lam2=lam2)


def nu_of_l(l):
    """Fiber scale produced by deforming b_{1/sqrt2} along A^l (or A^r) at scale l.

    The killing directions have base length 1/sqrt(2), so the deformation
    multiplies them by l / sqrt(l^2 + 1/2).
    """
    if _is_inf(l):
        return SQRT_HALF
    return SQRT_HALF * l / math.sqrt(l * l + 0.5)


def l_of_nu(nu):
    """Inverse of nu_of_l on (0, 1/sqrt(2))."""
    if abs(nu - SQRT_HALF) < 1e-15:
        return INF
    r = 2.0 * nu * nu
    return math.sqrt(0.5 * r / (1.0 - r))


def biinvariant_inner(X, Y):
    return Biinvariant().inner(X, Y)


def split_inner(nu1, nu2):
    return SplitMetric(nu1, nu2)


def cheeger_deform(base, action, l):
    if _is_inf(l):
        return base
    return CheegerDeformed(base, [(action, l)])


def full_metric(params):
    """g_{nu1, nu2, l1u, l1d}: split metric further deformed by A^u and A^d."""
    base = SplitMetric(params.nu1, params.nu2)
    actions = [(AU, params.l1u), (AD, params.l1d)]
    actions = [(a, l) for a, l in actions if not _is_inf(l)]
    if not actions:
        return base
    return CheegerDeformed(base, actions)
