"""Points, tangent vectors and group actions of Sp(2).

A point of Sp(2) is a 2x2 quaternionic matrix ((a, b), (c, d)) with
orthonormal columns; it is stored as an ndarray of shape (2, 2, 4)
(matrix index pair first, quaternion components last).  Tangent vectors
are stored the same way, as ambient column-pair derivatives.

The module also provides the fixed splitting V1 + V2 + H of the Lie
algebra, a b-orthonormal chart basis adapted to it, and an exponential
coordinate chart used by the finite-difference curvature engine.
"""

from dataclasses import dataclass

import numpy as np

from . import quat
from .quat import qconj, qdot, qmul, to_complex, from_complex

POINT_TOL = 1e-12


# ---------------------------------------------------------------------------
# quaternionic 2x2 matrix helpers

def mmul(A, B):
    """Product of 2x2 quaternionic matrices, shape (..., 2, 2, 4)."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape))
    for i in range(2):
        for j in range(2):
            out[..., i, j, :] = qmul(A[..., i, 0, :], B[..., 0, j, :]) + qmul(
                A[..., i, 1, :], B[..., 1, j, :]
            )
    return out


def mconjT(A):
    A = np.asarray(A, float)
    return np.swapaxes(qconj(A), -3, -2)


def mat(a, b, c, d):
    return np.stack([np.stack([a, b], axis=-2), np.stack([c, d], axis=-2)], axis=-3)


def identity_mat():
    z = np.zeros(4)
    return mat(quat.ONE, z, z, quat.ONE)


def to_complex4(M):
    """Embed a quaternionic 2x2 matrix as a 4x4 complex matrix."""
    M = np.asarray(M, float)
    blocks = to_complex(M)  # (..., 2, 2, 2, 2)
    out = np.empty(M.shape[:-3] + (4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[..., 2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = blocks[..., i, j, :, :]
    return out


def from_complex4(Mc):
    Mc = np.asarray(Mc, complex)
    out = np.empty(Mc.shape[:-2] + (2, 2, 4))
    for i in range(2):
        for j in range(2):
            out[..., i, j, :] = from_complex(Mc[..., 2 * i : 2 * i + 2, 2 * j : 2 * j + 2])
    return out


def binner(X, Y):
    """Biinvariant metric b_{1/sqrt2} on ambient column pairs.

    Equals half the Euclidean inner product of the R^16 representations,
    i.e. the product metric of two radius-1/sqrt(2) seven-spheres written
    in unit-column coordinates.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    return 0.5 * np.sum(X * Y, axis=(-1, -2, -3))


def binner_c(Xc, Yc):
    """binner in the complex embedding: Re tr(Xc^H Yc) / 4."""
    return 0.25 * np.real(np.einsum("...ij,...ij->...", np.conj(Xc), Yc))


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class Sp2Point:
    """A 2x2 quaternionic matrix with orthonormal columns."""

    m: np.ndarray  # (2, 2, 4)

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, float))
        if self.m.shape != (2, 2, 4):
            raise ValueError("Sp2Point expects shape (2, 2, 4)")

    @property
    def a(self):
        return self.m[0, 0]

    @property
    def b(self):
        return self.m[0, 1]

    @property
    def c(self):
        return self.m[1, 0]

    @property
    def d(self):
        return self.m[1, 1]

    def column(self, j):
        return self.m[:, j]

    def constraint_residual(self):
        """Max violation of column orthonormality."""
        r = 0.0
        for j in range(2):
            col = self.m[:, j]
            r = max(r, abs(np.sum(col * col) - 1.0))
        cross = qmul(qconj(self.a), self.b) + qmul(qconj(self.c), self.d)
        return max(r, float(np.linalg.norm(cross)))

    def check(self, tol=1e-9):
        res = self.constraint_residual()
        if res > tol:
            raise ValueError(f"not a point of Sp(2): constraint residual {res:.3e}")
        return self

    def complex(self):
        return to_complex4(self.m)


@dataclass(frozen=True)
class TangentVec:
    """Ambient tangent vector at a point of Sp(2), as a column pair."""

    m: np.ndarray  # (2, 2, 4)
    at: Sp2Point

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, float))

    @property
    def c1(self):
        return self.m[:, 0]

    @property
    def c2(self):
        return self.m[:, 1]

    def __add__(self, other):
        return TangentVec(self.m + other.m, self.at)

    def __sub__(self, other):
        return TangentVec(self.m - other.m, self.at)

    def __mul__(self, s):
        return TangentVec(self.m * float(s), self.at)

    __rmul__ = __mul__

    def constraint_residual(self):
        """Violation of the infinitesimal Sp(2) conditions."""
        Q = self.at.m
        r = 0.0
        for j in range(2):
            r = max(r, abs(np.sum(Q[:, j] * self.m[:, j])))
        cross = (
            qmul(qconj(self.m[0, 0]), Q[0, 1])
            + qmul(qconj(Q[0, 0]), self.m[0, 1])
            + qmul(qconj(self.m[1, 0]), Q[1, 1])
            + qmul(qconj(Q[1, 0]), self.m[1, 1])
        )
        return max(r, float(np.linalg.norm(cross)))


def identity_point():
    return Sp2Point(identity_mat())


@dataclass(frozen=True)
class ImaginaryFrame:
    """The frame (alpha, gamma1, gamma2) of imaginary units, gamma1 gamma2 = alpha."""

    alpha: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray

    def check(self, tol=1e-12):
        for v in (self.alpha, self.gamma1, self.gamma2):
            if abs(np.linalg.norm(v) - 1.0) > tol or abs(v[0]) > tol:
                raise ValueError("frame entries must be imaginary unit quaternions")
        if np.linalg.norm(qmul(self.gamma1, self.gamma2) - self.alpha) > tol:
            raise ValueError("frame must satisfy gamma1 gamma2 = alpha")
        return self


DEFAULT_FRAME = ImaginaryFrame(quat.I, quat.J, quat.K)


# ---------------------------------------------------------------------------
# actions

ACTION_KINDS = ("Au", "Ad", "Al", "Ar", "A20")


@dataclass(frozen=True)
class ActionDescriptor:
    """One of the five S^3 actions on Sp(2)."""

    kind: str

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action {self.kind!r}")

    @property
    def side(self):
        return "left" if self.kind in ("Au", "Ad", "A20") else "right"

    @property
    def block(self):
        return {"Au": "row1", "Ad": "row2", "Al": "col1", "Ar": "col2", "A20": "all"}[
            self.kind
        ]


AU = ActionDescriptor("Au")
AD = ActionDescriptor("Ad")
AL = ActionDescriptor("Al")
AR = ActionDescriptor("Ar")
A20 = ActionDescriptor("A20")


def act(action, g, Q):
    """Apply the action of a unit quaternion g to a point Q."""
    g = np.asarray(g, float)
    if abs(np.linalg.norm(g) - 1.0) > 1e-10:
        raise ValueError("group element must be a unit quaternion")
    m = Q.m
    out = np.array(m)
    kind = action.kind
    if kind == "Au":
        out[0, 0] = qmul(g, m[0, 0])
        out[0, 1] = qmul(g, m[0, 1])
    elif kind == "Ad":
        out[1, 0] = qmul(g, m[1, 0])
        out[1, 1] = qmul(g, m[1, 1])
    elif kind == "Al":
        gc = qconj(g)
        out[0, 0] = qmul(m[0, 0], gc)
        out[1, 0] = qmul(m[1, 0], gc)
    elif kind == "Ar":
        gc = qconj(g)
        out[0, 1] = qmul(m[0, 1], gc)
        out[1, 1] = qmul(m[1, 1], gc)
    else:  # A20
        for i in range(2):
            for j in range(2):
                out[i, j] = qmul(g, m[i, j])
    return Sp2Point(out)


def act_tangent(action, g, X):
    """Pushforward of a tangent vector under act(action, g, .)."""
    fake = Sp2Point.__new__(Sp2Point)
    object.__setattr__(fake, "m", X.m)
    moved = act(action, g, fake).m
    return TangentVec(moved, act(action, g, X.at))


def killing_field(action, k, Q):
    """Killing field of the one-parameter subgroup exp(t k) at Q.

    k is a purely imaginary quaternion; the derivative is taken
    algebraically (left factors multiply by k, right factors by -k).
    """
    k = np.asarray(k, float)
    if abs(k[0]) > 1e-13:
        raise ValueError("generator must be purely imaginary")
    m = Q.m
    out = np.zeros((2, 2, 4))
    kind = action.kind
    if kind == "Au":
        out[0, 0] = qmul(k, m[0, 0])
        out[0, 1] = qmul(k, m[0, 1])
    elif kind == "Ad":
        out[1, 0] = qmul(k, m[1, 0])
        out[1, 1] = qmul(k, m[1, 1])
    elif kind == "Al":
        out[0, 0] = -qmul(m[0, 0], k)
        out[1, 0] = -qmul(m[1, 0], k)
    elif kind == "Ar":
        out[0, 1] = -qmul(m[0, 1], k)
        out[1, 1] = -qmul(m[1, 1], k)
    else:  # A20
        for i in range(2):
            for j in range(2):
                out[i, j] = qmul(k, m[i, j])
    return TangentVec(out, Q)


# ---------------------------------------------------------------------------
# representative points

def representative_point(theta, t, alpha=None):
    """The canonical orbit representative N(theta, t).

    theta in [0, pi), t in [0, pi/4]; alpha an imaginary unit quaternion.
    """
    if alpha is None:
        alpha = quat.I
    alpha = np.asarray(alpha, float)
    if not (0.0 <= t <= np.pi / 4 + 1e-12):
        raise ValueError("t must lie in [0, pi/4]")
    if not (0.0 <= theta < np.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi)")
    if abs(alpha[0]) > 1e-13 or abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
        raise ValueError("alpha must be an imaginary unit quaternion")
    ct, st = np.cos(t), np.sin(t)
    base = mat(ct * quat.ONE, st * alpha, st * alpha, ct * quat.ONE)
    return Sp2Point(mmul(so2_matrix(theta), base))


def so2_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return mat(c * quat.ONE, s * quat.ONE, -s * quat.ONE, c * quat.ONE)


# ---------------------------------------------------------------------------
# Lie algebra chart basis, adapted to V1 + V2 + H and b-orthonormal

def _chart_basis():
    basis = []
    s2 = np.sqrt(2.0)
    z = np.zeros(4)
    for u in quat.IMAG_UNITS:
        basis.append(mat(s2 * u, z, z, z))  # V1
    for u in quat.IMAG_UNITS:
        basis.append(mat(z, z, z, s2 * u))  # V2
    for u in (quat.ONE, quat.I, quat.J, quat.K):
        basis.append(mat(z, u, -qconj(u), z))  # H
    return np.stack(basis)


CHART_BASIS = _chart_basis()  # (10, 2, 2, 4), b-orthonormal
CHART_BASIS_C = to_complex4(CHART_BASIS)  # (10, 4, 4)
V1_IDX = slice(0, 3)
V2_IDX = slice(3, 6)
H_IDX = slice(6, 10)


def expm_aherm(A):
    """Matrix exponential of anti-Hermitian matrices, batched, via eigh."""
    lam, U = np.linalg.eigh(1j * np.asarray(A, complex))
    phase = np.exp(-1j * lam)
    return np.einsum("...ij,...j,...kj->...ik", U, phase, np.conj(U))


def expm_aherm_with_dirs(A, dirs):
    """exp(A) and its Frechet derivatives in the given constant directions.

    A has shape (..., n, n) anti-Hermitian, dirs (m, n, n).  Returns
    (exp(A), L) with L of shape (..., m, n, n).  Uses the spectral
    divided-difference formula, valid for normal matrices.
    """
    A = np.asarray(A, complex)
    lam, U = np.linalg.eigh(1j * A)
    phase = np.exp(-1j * lam)
    E = np.einsum("...ij,...j,...kj->...ik", U, phase, np.conj(U))
    diff = lam[..., :, None] - lam[..., None, :]
    mean = 0.5 * (lam[..., :, None] + lam[..., None, :])
    phi = np.exp(-1j * mean) * np.sinc(diff / (2.0 * np.pi))
    Et = np.einsum("...ji,mjk,...kl->...mil", np.conj(U), np.asarray(dirs, complex), U)
    L = np.einsum("...ij,...mjk,...lk->...mil", U, phi[..., None, :, :] * Et, np.conj(U))
    return E, L


def chart_points(Qc, xs):
    """Chart points Q exp(sum x_i E_i) for a batch of coordinates xs (B, 10)."""
    A = np.einsum("bi,ijk->bjk", np.asarray(xs, float), CHART_BASIS_C)
    return Qc @ expm_aherm(A)


def chart_points_and_frames(Qc, xs):
    """Chart points plus the coordinate frames D_i = d/dx_i of the chart.

    Returns (P, D) with P (B, 4, 4) and D (B, 10, 4, 4), everything in
    the complex embedding.
    """
    A = np.einsum("bi,ijk->bjk", np.asarray(xs, float), CHART_BASIS_C)
    E, L = expm_aherm_with_dirs(A, CHART_BASIS_C)
    return Qc @ E, np.einsum("ij,bmjk->bmik", Qc, L)


def exp_chart(Q, x):
    """Point Q exp(sum x_i E_i) for a single coordinate vector x."""
    x = np.asarray(x, float)
    if np.linalg.norm(x) > 0.5 + 1e-12:
        raise ValueError("chart coordinates outside chart radius 0.5")
    P = chart_points(Q.complex(), x[None])[0]
    return Sp2Point(from_complex4(P))


def left_coords(Pc, Tc):
    """Coordinates of ambient tangents in the left-invariant chart frame.

    Pc is a point (..., 4, 4); Tc tangents (..., m, 4, 4).  Returns
    (..., m, 10): coefficient i is b(T, P E_i).
    """
    xi = np.einsum("...ji,...mjk->...mik", np.conj(Pc), np.asarray(Tc, complex))
    return 0.25 * np.real(np.einsum("ikj,...mjk->...mi", np.conj(CHART_BASIS_C).transpose(0, 2, 1), xi))


def from_left_coords(Pc, coords):
    """Inverse of left_coords: tangents P (sum c_i E_i)."""
    A = np.einsum("...mi,ijk->...mjk", np.asarray(coords, float), CHART_BASIS_C)
    return np.einsum("...ij,...mjk->...mik", Pc, A)


def tangent_from_coords(Q, c):
    """TangentVec at Q with the given left-invariant chart coordinates."""
    Tc = from_left_coords(Q.complex(), np.asarray(c, float)[None])[0]
    return TangentVec(from_complex4(Tc), Q)


def tangent_coords(X):
    """Left-invariant chart coordinates of a TangentVec."""
    return left_coords(X.at.complex(), to_complex4(X.m)[None])[0]


# killing field coordinates, batched over points ------------------------------

_EMB_UNITS = to_complex(quat.IMAG_UNITS)  # (3, 2, 2)


def _left_factors(kind):
    """Complex 4x4 factors F_i with K_i = F_i P (left actions)."""
    out = np.zeros((3, 4, 4), complex)
    if kind == "Au":
        out[:, 0:2, 0:2] = _EMB_UNITS
    elif kind == "Ad":
        out[:, 2:4, 2:4] = _EMB_UNITS
    elif kind == "A20":
        out[:, 0:2, 0:2] = _EMB_UNITS
        out[:, 2:4, 2:4] = _EMB_UNITS
    else:
        raise ValueError(kind)
    return out


def _right_factors(kind):
    """Factors C_i with K_i = P C_i (right actions)."""
    out = np.zeros((3, 4, 4), complex)
    if kind == "Al":
        out[:, 0:2, 0:2] = -_EMB_UNITS
    elif kind == "Ar":
        out[:, 2:4, 2:4] = -_EMB_UNITS
    else:
        raise ValueError(kind)
    return out


_LEFT_KINDS = ("Au", "Ad", "A20")


def killing_coords(action, Pc):
    """Left-invariant coordinates of the killing fields K_i, i in (i, j, k).

    Pc has shape (..., 4, 4); the result has shape (..., 3, 10).
    """
    kind = action.kind
    if kind in _LEFT_KINDS:
        K = np.einsum("mij,...jk->...mik", _left_factors(kind), Pc)
    else:
        K = np.einsum("...ij,mjk->...mik", Pc, _right_factors(kind))
    return left_coords(Pc, K)


# splitting -------------------------------------------------------------------

@dataclass(frozen=True)
class Splitting:
    """Bases of V1, V2 and H at a point, by left translation of the chart basis."""

    basisV1: tuple
    basisV2: tuple
    basisH: tuple
    at: Sp2Point


def splitting_at(Q):
    vecs = [TangentVec(mmul(Q.m, E), Q) for E in CHART_BASIS]
    return Splitting(tuple(vecs[0:3]), tuple(vecs[3:6]), tuple(vecs[6:10]), Q)


def split_components(X):
    """Coordinates of X in the (V1, V2, H) blocks of the chart frame."""
    c = tangent_coords(X)
    return c[V1_IDX], c[V2_IDX], c[H_IDX]
