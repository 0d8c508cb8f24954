"""Independent oracles used across the test suite.

These deliberately avoid the package's solver machinery: full-box enumeration
with no pruning, plain elementwise arithmetic, and central finite differences.
"""

import numpy as np


def full_box(z_cap):
    """All lattice points of [0, z_cap]^4 in lexicographic order, shape (P, 4)."""
    grid = np.indices((z_cap + 1,) * 4).reshape(4, -1).T
    return grid.astype(np.int64)


def box_consumption(A, Z):
    """Per-point resource loads with left-to-right accumulation per row."""
    Zf = Z.astype(float)
    out = np.empty((len(Zf), 3))
    for j in range(3):
        out[:, j] = ((A[j, 0] * Zf[:, 0] + A[j, 1] * Zf[:, 1]) + A[j, 2] * Zf[:, 2]) + A[j, 3] * Zf[:, 3]
    return out


def box_objective(c, q, b, Z, loads):
    Zf = Z.astype(float)
    cz = ((c[0] * Zf[:, 0] + c[1] * Zf[:, 1]) + c[2] * Zf[:, 2]) + c[3] * Zf[:, 3]
    m = np.maximum(b - loads, 0.0)
    return cz + ((q[0] * m[:, 0] + q[1] * m[:, 1]) + q[2] * m[:, 2])


def brute_force_deterministic(A, c, b, q, z_cap):
    """Unpruned exhaustive maximizer over the capped box; lexicographic-first
    argmax.  Returns (z, value)."""
    Z = full_box(z_cap)
    loads = box_consumption(A, Z)
    vals = box_objective(c, q, b, Z, loads)
    vals[~(loads <= b).all(axis=1)] = -np.inf
    k = int(np.argmax(vals))
    return Z[k], float(vals[k])


def brute_force_chance(mats, w, alpha, c, b, q, z_cap, tol=1e-12):
    """Unpruned exhaustive maximizer of the weighted feasible-scenario
    objective under the chance constraint.  Returns (z, value)."""
    Z = full_box(z_cap)
    total = np.zeros(len(Z))
    surviving = np.zeros(len(Z))
    for s in range(len(mats)):
        loads = box_consumption(mats[s], Z)
        alive = (loads <= b).all(axis=1)
        vals = box_objective(c, q, b, Z, loads)
        total = total + w[s] * (vals * alive)
        surviving = surviving + w[s] * alive
    total[surviving < alpha - tol] = -np.inf
    k = int(np.argmax(total))
    return Z[k], float(total[k])


def central_diff(f, x0, h=1e-5):
    """Central finite-difference gradient of scalar f at x0."""
    x0 = np.asarray(x0, dtype=float)
    g = np.empty_like(x0)
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        g[i] = (f(x0 + e) - f(x0 - e)) / (2.0 * h)
    return g


def central_diff_jacobian(f, x0, m, h=1e-5):
    """Central finite-difference Jacobian of vector-valued f (output dim m)."""
    x0 = np.asarray(x0, dtype=float)
    J = np.empty((m, x0.size))
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        J[:, i] = (f(x0 + e) - f(x0 - e)) / (2.0 * h)
    return J
