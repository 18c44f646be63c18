"""Independent brute-force oracles used to cross-check the library.

Everything here is deliberately written against the *definitions* (exhaustive
enumeration, KKT conditions, dense eigensolves, finite differences) rather
than reusing library code paths, so the tests compare two independent routes
to the same quantity.
"""

import itertools

import numpy as np


def brute_birkhoff_min(c_flat, n):
    """Min-cost over all n! permutation matrices; returns (value, flat matrix)."""
    C = c_flat.reshape(n, n)
    best_val, best_P = np.inf, None
    for perm in itertools.permutations(range(n)):
        val = sum(C[i, perm[i]] for i in range(n))
        if val < best_val - 1e-15:
            best_val = val
            P = np.zeros((n, n))
            for i, j in enumerate(perm):
                P[i, j] = 1.0
            best_P = P.ravel()
    return best_val, best_P


def enumerate_dag_paths(edges, source, sink):
    """All source->sink paths as lists of edge indices (recursive DFS)."""
    out = {}
    for idx, (u, v) in enumerate(edges):
        out.setdefault(u, []).append((idx, v))
    paths = []

    def walk(node, acc):
        if node == sink:
            paths.append(list(acc))
            return
        for idx, nxt in out.get(node, []):
            acc.append(idx)
            walk(nxt, acc)
            acc.pop()

    walk(source, [])
    return paths


def brute_dag_min(edges, costs, source, sink):
    """Min-cost path by full enumeration; returns (value, indicator vector)."""
    best_val, best_x = np.inf, None
    for path in enumerate_dag_paths(edges, source, sink):
        val = sum(costs[i] for i in path)
        if val < best_val - 1e-15:
            best_val = val
            x = np.zeros(len(edges))
            x[path] = 1.0
            best_x = x
    return best_val, best_x


def kkt_simplex_project(v, iters=200):
    """Euclidean projection onto the simplex via bisection on the KKT threshold."""
    v = np.asarray(v, dtype=float)
    lo, hi = float(v.min()) - 1.0, float(v.max())
    for _ in range(iters):
        theta = 0.5 * (lo + hi)
        if np.maximum(v - theta, 0.0).sum() > 1.0:
            lo = theta
        else:
            hi = theta
    theta = 0.5 * (lo + hi)
    return np.maximum(v - theta, 0.0)


def proj_l1_ball(v, radius=1.0):
    """Euclidean projection onto the l1 ball, via simplex projection of |v|."""
    v = np.asarray(v, dtype=float)
    if np.abs(v).sum() <= radius:
        return v.copy()
    w = kkt_simplex_project(np.abs(v) / radius) * radius
    return np.sign(v) * w


def dense_spectra_min(C):
    """Exact spectrahedron LMO by dense eigensolve: (lambda_min, unit eigvec)."""
    w, V = np.linalg.eigh(C)
    return float(w[0]), V[:, 0]


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x, dtype=float)
    for i in range(len(x)):
        e = np.zeros_like(x, dtype=float)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def grid_game_value(A, steps=400):
    """max_{y in grid(Delta_m)} min_j (A^T y)_j -- lower bound on the game value.

    Exact as steps -> inf by LP duality; m <= 3 keeps the grid exhaustive.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if m == 1:
        ys = np.ones((1, 1))
    elif m == 2:
        t = np.linspace(0.0, 1.0, steps + 1)
        ys = np.stack([t, 1.0 - t], axis=1)
    elif m == 3:
        pts = []
        for i in range(steps + 1):
            for j in range(steps + 1 - i):
                pts.append((i / steps, j / steps, (steps - i - j) / steps))
        ys = np.array(pts)
    else:
        raise ValueError("grid oracle only supports m <= 3")
    vals = (ys @ A).min(axis=1)
    return float(vals.max())


def quad_psi_opt(g, center, beta, project):
    """Exact minimum of <g,x> + beta/2 ||x-center||^2 via projection oracle.

    psi(x) = beta/2 ||x - (center - g/beta)||^2 + const, so the minimizer is
    the Euclidean projection of center - g/beta onto the region.
    """
    p = project(center - g / beta)
    return float(g @ p + 0.5 * beta * ((p - center) @ (p - center))), p
