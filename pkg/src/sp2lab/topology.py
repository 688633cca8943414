"""Topology of the S^3-bundles over S^4 containing E_{2,0}.

Exact integer computations: the quaternionic gluing maps classifying
the bundles, the homology of E_{m,-n} from the Mayer-Vietoris boundary
matrix by Smith normal form, and a numerical verification that the
quotient E_{2,0} carries bundle charts whose transition map is the
type-(1,1) gluing map of the unit tangent bundle of S^4.

Indexing convention: ``gluing_map(m, n, ...)`` uses the chart-transition
exponents, (u, v) -> (u/|u|^2, u^m v u^n / |u|^(m+n)), while
``homology_E(m, n)`` labels the bundle E_{m,-n} whose gluing map is
(u, v) -> (u, u^m v u^{-n}) on the boundary three-spheres.
``bundle_type`` translates between the two.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .sp2 import Sp2Point


# ---------------------------------------------------------------------------
# gluing maps

def gluing_map(m, n, u, v):
    """Chart transition of the type-(m, n) bundle on the overlap.

    (u, v) -> (u / |u|^2,  u^m v u^n / |u|^(m + n)) with u a nonzero
    quaternion and v a unit quaternion; the second component is again a
    unit quaternion.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    r = quat.qnorm(u)
    if r == 0.0:
        raise ValueError("gluing map is undefined at u = 0")
    uh = u / r

    def power(q, k):
        out = quat.ONE.copy()
        for _ in range(abs(int(k))):
            out = quat.qmul(out, q)
        return quat.qconj(out) if k < 0 else out

    first = u / (r * r)
    second = quat.qmul(power(uh, m), quat.qmul(v, power(uh, n)))
    return first, second


def bundle_type(m_glue, n_glue):
    """(m, n) labels of E_{m,-n} realized by ``gluing_map(m_glue, n_glue)``.

    The boundary gluing of E_{m,-n} is v -> u^m v u^{-n}, so the chart
    exponents (m_glue, n_glue) correspond to (m, n) = (m_glue, -n_glue).
    """
    return int(m_glue), -int(n_glue)


# ---------------------------------------------------------------------------
# Smith normal form (exact integer arithmetic)

def smith_normal_form(A):
    """Diagonalize an integer matrix by unimodular row/column operations.

    Returns (D, U, V) with U @ A @ V = D, U and V unimodular, and D
    diagonal with each entry dividing the next.  Python integers keep
    the computation exact.
    """
    D = [[int(x) for x in row] for row in np.asarray(A).tolist()]
    r, c = len(D), len(D[0])
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(M, i, j):
        M[i], M[j] = M[j], M[i]

    def add_row(M, i, j, k):  # row i += k * row j
        M[i] = [a + k * b for a, b in zip(M[i], M[j])]

    def swap_cols(M, i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]

    def add_col(M, i, j, k):  # col i += k * col j
        for row in M:
            row[i] += k * row[j]

    t = 0
    while t < min(r, c):
        # move a nonzero pivot of minimal magnitude to (t, t)
        piv = None
        for i in range(t, r):
            for j in range(t, c):
                if D[i][j] != 0 and (piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        if piv[0] != t:
            swap_rows(D, t, piv[0])
            swap_rows(U, t, piv[0])
        if piv[1] != t:
            swap_cols(D, t, piv[1])
            swap_cols(V, t, piv[1])
        # clear the rest of the row and column
        dirty = False
        for i in range(t + 1, r):
            if D[i][t] != 0:
                k = -(D[i][t] // D[t][t])
                add_row(D, i, t, k)
                add_row(U, i, t, k)
                if D[i][t] != 0:
                    dirty = True
        for j in range(t + 1, c):
            if D[t][j] != 0:
                k = -(D[t][j] // D[t][t])
                add_col(D, j, t, k)
                add_col(V, j, t, k)
                if D[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # enforce divisibility of later entries by the pivot
        bad = None
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if D[i][j] % D[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            add_row(D, t, bad, 1)
            add_row(U, t, bad, 1)
            continue
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return (
        np.array(D, dtype=object),
        np.array(U, dtype=object),
        np.array(V, dtype=object),
    )


def cokernel_invariants(A):
    """(free_rank, torsion) of coker(A : Z^c -> Z^r) from the Smith form."""
    A = np.asarray(A)
    D, _, _ = smith_normal_form(A)
    r = A.shape[0]
    diag = [int(D[i][i]) for i in range(min(D.shape))]
    nonzero = [d for d in diag if d != 0]
    free_rank = r - len(nonzero)
    torsion = [d for d in nonzero if d > 1]
    return free_rank, torsion


def cokernel_enumeration(A):
    """(order, exponent) of coker(A) by brute-force coset enumeration.

    Only valid when the cokernel is finite (square A with nonzero
    determinant); used as an independent cross-check of the Smith form.
    """
    A = np.asarray(A, dtype=np.int64)
    det = int(round(np.linalg.det(A.astype(float))))
    if A.shape[0] != A.shape[1] or det == 0:
        raise ValueError("cokernel is infinite; enumeration undefined")
    d = abs(det)
    Ainv_times_det = np.array(
        [[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]], dtype=np.int64
    ) * (1 if det > 0 else -1)

    def in_image(x):
        y = Ainv_times_det @ np.asarray(x, dtype=np.int64)
        return y[0] % d == 0 and y[1] % d == 0

    reps = []
    for i in range(d):
        for j in range(d):
            x = np.array([i, j], dtype=np.int64)
            if not any(in_image(x - r) for r in reps):
                reps.append(x)
    exponent = 1
    for rep in reps:
        k = 1
        while not in_image(k * rep):
            k += 1
        exponent = exponent * k // math.gcd(exponent, k)
    return len(reps), exponent


# ---------------------------------------------------------------------------
# homology of E_{m,-n}

def phi3_matrix(m, n):
    """Mayer-Vietoris boundary matrix in degree three for E_{m,-n}."""
    return np.array([[0, 1], [int(m) - int(n), 1]], dtype=np.int64)


@dataclass(frozen=True)
class HomologyReport:
    """Integral homology and low homotopy of E_{m,-n}."""

    m: int
    n: int
    free_ranks: tuple  # betti numbers b_0..b_7
    torsion: tuple  # torsion coefficients per degree 0..7
    pi1_trivial: bool
    pi2_trivial: bool
    pi3_order: object  # int order, or math.inf for Z
    hypothesis_fails: bool  # True when m == n (H_4..H_6 not determined)

    def to_dict(self):
        return {
            "m": self.m,
            "n": self.n,
            "H": [
                {"rank": r, "torsion": list(t)}
                for r, t in zip(self.free_ranks, self.torsion)
            ],
            "pi1_trivial": self.pi1_trivial,
            "pi2_trivial": self.pi2_trivial,
            "pi3": "Z" if self.pi3_order == math.inf
            else f"Z/{self.pi3_order}" if self.pi3_order > 1 else "0",
            "hypothesis_fails": self.hypothesis_fails,
        }


def homology_E(m, n):
    """Integral homology of the S^3-bundle E_{m,-n} over S^4.

    H_3 is the cokernel of the degree-three Mayer-Vietoris matrix
    [[0, 1], [m - n, 1]]; H_0 and H_7 are Z, everything else vanishes
    when m != n.  For m = n the matrix is singular: H_3 is free of rank
    one and the vanishing argument for H_4..H_6 does not apply, which
    the report flags.
    """
    m, n = int(m), int(n)
    free_rank, torsion = cokernel_invariants(phi3_matrix(m, n))
    ranks = [0] * 8
    tors = [[] for _ in range(8)]
    ranks[0] = ranks[7] = 1
    ranks[3] = free_rank
    tors[3] = list(torsion)
    # H_4 is the kernel of the boundary matrix, which for a square
    # matrix has the same rank as the free part of its cokernel; it
    # vanishes exactly when m != n.
    ranks[4] = free_rank
    d = abs(m - n)
    pi3 = math.inf if d == 0 else d
    return HomologyReport(
        m=m,
        n=n,
        free_ranks=tuple(ranks),
        torsion=tuple(tuple(t) for t in tors),
        pi1_trivial=True,
        pi2_trivial=True,
        pi3_order=pi3,
        hypothesis_fails=(m == n),
    )


# ---------------------------------------------------------------------------
# bundle charts of E_{2,0} and the transition identity

def _phi(u):
    return 1.0 / math.sqrt(1.0 + float(quat.qdot(u, u)))


def chart_h1(u, q):
    """First bundle chart R^4 x S^3 -> E_{2,0} (represented in Sp(2))."""
    u = np.asarray(u, float)
    q = np.asarray(q, float)
    p = _phi(u)
    m = np.stack(
        [
            np.stack([-q, quat.qmul(q, u)]),
            np.stack([quat.qconj(u), quat.ONE]),
        ]
    )
    return Sp2Point(p * m)


def chart_h2(v, r):
    """Second bundle chart R^4 x S^3 -> E_{2,0} (represented in Sp(2))."""
    v = np.asarray(v, float)
    r = np.asarray(r, float)
    p = _phi(v)
    m = np.stack(
        [
            np.stack([-quat.qmul(r, quat.qconj(v)), r]),
            np.stack([quat.ONE, v]),
        ]
    )
    return Sp2Point(p * m)


def chart_h1_inverse(N):
    """Inverse of the first chart on {d != 0}; constant on A_20 orbits."""
    d2 = float(quat.qdot(N.d, N.d))
    if d2 == 0.0:
        raise ValueError("first chart does not cover d = 0")
    u = quat.qmul(quat.qconj(N.c), N.d) / d2
    q = -quat.qmul(quat.qconj(N.d), N.a)
    q = q / quat.qnorm(q)
    return u, q


def chart_h2_inverse(N):
    """Inverse of the second chart on {c != 0}; constant on A_20 orbits."""
    c2 = float(quat.qdot(N.c, N.c))
    if c2 == 0.0:
        raise ValueError("second chart does not cover c = 0")
    v = quat.qmul(quat.qconj(N.c), N.d) / c2
    r = quat.qmul(quat.qconj(N.c), N.b)
    r = r / quat.qnorm(r)
    return v, r


def transition_identity_check(samples=10000, seed=0, tol=1e-12):
    """Verify h2^{-1} o h1 equals the type-(1,1) gluing map.

    Draws random (u, q) with u != 0 and |q| = 1, pushes them through the
    first chart and back through the inverse of the second, and compares
    with ``gluing_map(1, 1, u, q)``.  Also checks that both charts land
    in Sp(2) and that their inverses are constant along the A_20 orbit
    (left multiplication of both rows by a unit quaternion).  Returns a
    dict with ``passed`` and the worst deviations; on failure the first
    counterexample is recorded.
    """
    rng = np.random.default_rng(seed)
    worst = {
        "transition": 0.0,
        "chart_constraint": 0.0,
        "orbit_invariance": 0.0,
        "roundtrip": 0.0,
    }
    counterexample = None
    for _ in range(samples):
        u = rng.normal(size=4) * math.exp(rng.normal())
        if quat.qnorm(u) < 1e-6:
            u = quat.I.copy()
        q = quat.random_unit(rng)
        N = chart_h1(u, q)
        worst["chart_constraint"] = max(
            worst["chart_constraint"], N.constraint_residual()
        )
        v, r = chart_h2_inverse(N)
        gv, gr = gluing_map(1, 1, u, q)
        err = max(np.abs(v - gv).max(), np.abs(r - gr).max())
        worst["transition"] = max(worst["transition"], err)
        if err > tol and counterexample is None:
            counterexample = {"u": u.tolist(), "q": q.tolist(), "error": err}
        # round trips of both charts
        u1, q1 = chart_h1_inverse(N)
        M = chart_h2(v, r)
        worst["chart_constraint"] = max(
            worst["chart_constraint"], M.constraint_residual()
        )
        v1, r1 = chart_h2_inverse(M)
        worst["roundtrip"] = max(
            worst["roundtrip"],
            np.abs(u1 - u).max(),
            np.abs(q1 - q).max(),
            np.abs(v1 - v).max(),
            np.abs(r1 - r).max(),
        )
        # inverses only see the A_20 orbit
        g = quat.random_unit(rng)
        Ng = Sp2Point(np.stack([
            np.stack([quat.qmul(g, N.a), quat.qmul(g, N.b)]),
            np.stack([quat.qmul(g, N.c), quat.qmul(g, N.d)]),
        ]))
        u2, q2 = chart_h1_inverse(Ng)
        worst["orbit_invariance"] = max(
            worst["orbit_invariance"],
            np.abs(u2 - u).max(),
            np.abs(q2 - q).max(),
        )
    passed = all(v <= tol for v in worst.values())
    out = {"samples": samples, "passed": passed, **worst}
    if counterexample is not None:
        out["counterexample"] = counterexample
    return out
