"""Quaternion algebra, vectorized over leading axes.

A quaternion is an ndarray of shape (..., 4) holding the components
(w, x, y, z) over the basis (1, i, j, k).
"""

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])

IMAG_UNITS = np.stack([I, J, K])


def quat(w=0.0, x=0.0, y=0.0, z=0.0):
    return np.array([w, x, y, z], dtype=float)


def qmul(p, q):
    """Hamilton product, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def qinv(q):
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    return qconj(q) / n2


def qre(q):
    return np.asarray(q, dtype=float)[..., 0]


def qim(q):
    """Imaginary part as a quaternion (real component zeroed)."""
    out = np.array(q, dtype=float)
    out[..., 0] = 0.0
    return out


def qdot(p, q):
    """Euclidean inner product of R^4, i.e. Re(conj(p) q)."""
    return np.sum(np.asarray(p, float) * np.asarray(q, float), axis=-1)


def quat_exp(v):
    """Exponential of a purely imaginary quaternion: cos|v| + sin|v| v/|v|.

    Returns the unit quaternion 1 for v = 0.
    """
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v[..., 0]) > 1e-14):
        raise ValueError("quat_exp expects a purely imaginary quaternion")
    theta = np.linalg.norm(v[..., 1:], axis=-1)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(theta)
    # sin(t)/t is 1 at t = 0; np.sinc(t/pi) handles the limit
    out[..., 1:] = v[..., 1:] * np.sinc(theta / np.pi)[..., None]
    return out


def random_unit_imaginary(rng):
    v = rng.standard_normal(3)
    v = v / np.linalg.norm(v)
    return np.concatenate([[0.0], v])


def random_unit(rng, shape=()):
    q = rng.standard_normal(shape + (4,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


# 2x2 complex embedding: w + xi + yj + zk -> [[w + xi, y + zi], [-y + zi, w - xi]].
def to_complex(q):
    """Embed quaternions (..., 4) as 2x2 complex matrices (..., 2, 2)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    m = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = w + 1j * x
    m[..., 0, 1] = y + 1j * z
    m[..., 1, 0] = -y + 1j * z
    m[..., 1, 1] = w - 1j * x
    return m


def from_complex(m):
    """Inverse of :func:`to_complex` (assumes m is in the image)."""
    m = np.asarray(m, dtype=complex)
    w = m[..., 0, 0].real
    x = m[..., 0, 0].imag
    y = m[..., 0, 1].real
    z = m[..., 0, 1].imag
    return np.stack([w, x, y, z], axis=-1)
