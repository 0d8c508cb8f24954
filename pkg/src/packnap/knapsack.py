"""Exact solvers for the integer salvage knapsack and its chance-constrained form.

The decision problem: choose item counts z (4 nonnegative integers) to maximize
``c.z + q.[b - A z]+`` subject to ``A z <= b``, where A is a 3x4 resource
consumption matrix, b the resource capacities, and q per-unit salvage on unused
capacity.  The chance-constrained variant optimizes the weighted objective over
a set of scenario matrices, counting only scenarios the decision is feasible
for, and requires the feasible scenarios to carry at least ``alpha`` of the
total weight.

Both problems are solved exactly by depth-first lattice enumeration, vectorized
level by level.  Strictly positive matrices get monotone-infeasibility pruning
(once A z <= b fails it fails for every componentwise-larger z); matrices with
nonpositive entries, which arise from noise-perturbed predictions, fall back to
optimistic-feasibility pruning under a per-coordinate cap.  An admissible upper
bound against a running incumbent keeps the search small either way, and on the
feasible set the objective collapses to ``q.b + (c - A^T q).z``, which yields a
greedy closure for the common all-rates-negative case.  Ties break to the
lexicographically smallest maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

N_ITEMS = 4
N_RESOURCES = 3
DEFAULT_Z_CAP = 64

# Tolerance for the chance-constraint weight sum only, absorbing simplex
# normalization rounding.  Resource feasibility comparisons are exact.
WEIGHT_TOL = 1e-12

_solve_calls = {"deterministic": 0, "chance": 0, "hindsight": 0}


def reset_solve_counter() -> None:
    for k in _solve_calls:
        _solve_calls[k] = 0


def solve_call_count(kind: str = "deterministic") -> int:
    return _solve_calls[kind]


@dataclass(frozen=True)
class KnapsackInstance:
    """Problem constants: item rewards c, capacities b, salvage values q."""

    c: np.ndarray = field(default_factory=lambda: np.full(N_ITEMS, 12.0))
    b: np.ndarray = field(default_factory=lambda: np.full(N_RESOURCES, 8.0))
    q: np.ndarray = field(default_factory=lambda: np.full(N_RESOURCES, 3.0))

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if c.shape != (N_ITEMS,) or b.shape != (N_RESOURCES,) or q.shape != (N_RESOURCES,):
            raise ValueError("instance dimensions must be c:4, b:3, q:3")
        if not (np.isfinite(c).all() and np.isfinite(b).all() and np.isfinite(q).all()):
            raise NumericError("instance constants must be finite")
        if (c < 0).any() or (q < 0).any():
            raise ValueError("c and q must be nonnegative")
        if (b <= 0).any():
            raise ValueError("b must be strictly positive")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class ScenarioSet:
    """Weighted scenario matrices plus the feasibility target alpha."""

    matrices: np.ndarray  # (N, 3, 4), entrywise > 0
    weights: np.ndarray   # (N,), probability simplex
    alpha: float

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if mats.ndim != 3 or mats.shape[1:] != (N_RESOURCES, N_ITEMS):
            raise ValueError("matrices must have shape (N, 3, 4)")
        if mats.shape[0] == 0:
            raise ValueError("scenario set must be non-empty")
        if w.shape != (mats.shape[0],):
            raise ValueError("weights must match scenario count")
        if not np.isfinite(mats).all():
            raise NumericError("scenario matrices must be finite")
        if (mats <= 0).any():
            raise ValueError("scenario matrices must be entrywise positive")
        if (w < 0).any() or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must be a probability simplex")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.matrices.shape[0]


@dataclass(frozen=True)
class Decision:
    """An integer decision vector and the solver's objective value for it."""

    z: np.ndarray
    value: float

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=np.int64))


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (N_RESOURCES, N_ITEMS):
        raise ValueError("weight matrix must be 3x4")
    if not np.isfinite(A).all():
        raise NumericError("weight matrix must be finite")
    return A


# Canonical float evaluation: consumption and objective terms accumulate left
# to right in item order.  The enumeration engines build partial loads with the
# same grouping, so a value reported by a solver is bit-identical to
# evaluate_reward at the same point.

def _consumption(A, Z):
    Zf = Z.astype(float)
    out = np.empty((len(Zf), N_RESOURCES))
    for j in range(N_RESOURCES):
        out[:, j] = ((A[j, 0] * Zf[:, 0] + A[j, 1] * Zf[:, 1]) + A[j, 2] * Zf[:, 2]) + A[j, 3] * Zf[:, 3]
    return out


def _objective(c, q, b, Z, loads):
    Zf = Z.astype(float)
    cz = ((c[0] * Zf[:, 0] + c[1] * Zf[:, 1]) + c[2] * Zf[:, 2]) + c[3] * Zf[:, 3]
    m = np.maximum(b - loads, 0.0)
    return cz + ((q[0] * m[:, 0] + q[1] * m[:, 1]) + q[2] * m[:, 2])


def evaluate_reward(z, A, inst: KnapsackInstance) -> tuple[float, bool]:
    """Realized reward of decision z under weight matrix A.

    Returns ``(reward, feasible)``: feasible iff ``A z <= b`` componentwise
    (exact comparison); the reward is ``c.z + q.[b - A z]+`` when feasible and
    0 otherwise.
    """
    z = np.asarray(z)
    if z.shape != (N_ITEMS,):
        raise ValueError("decision must have 4 components")
    if not np.issubdtype(z.dtype, np.integer):
        zi = np.asarray(z, dtype=np.int64)
        if not np.array_equal(zi, z):
            raise ValueError("decision must be integer")
        z = zi
    if (z < 0).any():
        raise ValueError("decision must be nonnegative")
    A = _check_matrix(A)
    Z = z[None, :]
    loads = _consumption(A, Z)
    feasible = bool((loads[0] <= inst.b).all())
    if not feasible:
        return 0.0, False
    return float(_objective(inst.c, inst.q, inst.b, Z, loads)[0]), True


def _ragged_arange(counts):
    # counts [2,3] -> [0,1,0,1,2]
    total = int(counts.sum())
    starts = np.cumsum(counts) - counts
    return np.arange(total, dtype=np.int64) - np.repeat(starts, counts)


def _exact_single_cap(col, b, z_cap) -> int:
    """Largest k with col * k <= b under exact float comparison (col > 0)."""
    k = int(min(np.floor(b / col).min(), z_cap))
    k = max(k, 0)
    while k + 1 <= z_cap and (col * (k + 1) <= b).all():
        k += 1
    while k > 0 and (col * k > b).any():
        k -= 1
    return k


def _node_caps_exact(col, b, loads, z_cap):
    """Vectorized largest k per node with loads + col*k <= b (col > 0)."""
    rem = b - loads
    with np.errstate(divide="ignore"):
        k = np.floor(np.min(rem / col, axis=1)).astype(np.int64)
    np.clip(k, 0, z_cap, out=k)
    up = (k + 1 <= z_cap) & (loads + np.outer(k + 1, col) <= b).all(axis=1)
    k[up] += 1
    down = (loads + k[:, None] * col > b).any(axis=1) & (k > 0)
    k[down] -= 1
    return k


def _node_caps_mixed(col, b, loads, slack, z_cap):
    """Conservative per-node cap for a column with some nonpositive entries:
    rows with positive consumption still bound z_i once the optimistic slack
    from the remaining items is added."""
    pos = col > 0
    if not pos.any():
        return np.full(len(loads), z_cap, dtype=np.int64)
    room = np.maximum(b + slack - loads, 0.0)
    with np.errstate(divide="ignore"):
        ratios = np.where(pos, room / np.where(pos, col, 1.0), np.inf)
    k = np.floor(ratios.min(axis=1)).astype(np.int64) + 1  # +1 absorbs division rounding
    return np.clip(k, 0, z_cap)


def solve_deterministic(A, inst: KnapsackInstance, z_cap: int = DEFAULT_Z_CAP) -> Decision:
    """Exact maximizer of ``c.z + q.[b - A z]+`` s.t. ``A z <= b``,
    ``0 <= z_i <= z_cap``; ties resolve to the lexicographically smallest z."""
    if z_cap < 0:
        raise ValueError("z_cap must be nonnegative")
    A = _check_matrix(A)
    _solve_calls["deterministic"] += 1
    return _solve_det_engine(A, inst, z_cap)


def _dual_multipliers(A, b, r, caps, target, iters=35):
    """Row multipliers mu >= 0 minimizing the Lagrangian bound
    ``mu.b + sum_i (r_i - mu.A_i)+ cap_i`` by projected Polyak subgradient
    steps toward ``target`` (a known lower bound on the optimum).

    Any mu >= 0 yields a valid upper bound on max r.z over {A z <= b, z in
    box}; a near-optimal mu makes the per-node completion bound tight enough
    to prune searches that the independent bound cannot touch (large caps on
    columns with mixed-sign entries)."""
    capsf = caps.astype(float)

    def bound_of(mu):
        return float(mu @ b + (np.maximum(r - mu @ A, 0.0) * capsf).sum())

    target = max(target, 0.0)
    mu = np.zeros(N_RESOURCES)
    best_mu, best_g = mu.copy(), bound_of(mu)
    for _ in range(iters):
        active = (r - mu @ A) > 0
        sub = b - (A[:, active] * capsf[active]).sum(axis=1)
        norm2 = float(sub @ sub)
        if norm2 < 1e-18:
            break
        g = bound_of(mu)
        mu = np.maximum(mu - ((g - target) / norm2) * sub, 0.0)
        g = bound_of(mu)
        if g < best_g:
            best_g, best_mu = g, mu.copy()
    return best_mu


def _greedy_incumbent(A, c, b, q, r, caps, kmin):
    """Feasible starting point for matrices with negative entries: begin from
    the forced coordinates and pour units into positive-rate items in rate
    order while feasibility allows.  Returns (z, exact value) or None."""
    z = kmin.astype(np.int64).copy()
    loads = _consumption(A, z[None, :])[0]
    if (loads > b).any():
        return None
    order = np.argsort(-r)
    for _ in range(3):
        changed = False
        for i in order:
            if r[i] <= 0 or z[i] >= caps[i]:
                continue
            col = A[:, i]
            pos = col > 0
            room = caps[i] - z[i]
            if pos.any():
                with np.errstate(divide="ignore"):
                    room = min(room, int(np.floor(((b - loads)[pos] / col[pos]).min())))
            add = max(int(room), 0)
            while add > 0 and (loads + col * add > b).any():
                add -= 1
            if add > 0:
                z[i] += add
                loads = loads + col * add
                changed = True
        if not changed:
            break
    # canonical re-evaluation; the incremental loads guided the search only
    loads = _consumption(A, z[None, :])[0]
    if (loads > b).any():
        return None
    return z, float(_objective(c, q, b, z[None, :], loads[None, :])[0])


def _solve_det_engine(A, inst: KnapsackInstance, z_cap: int) -> Decision:
    c, b, q = inst.c, inst.b, inst.q
    all_nonneg = not (A < 0).any()
    # on the feasible set the objective equals q.b + r.z with r = c - A^T q
    r = c - A.T @ q
    rplus = np.maximum(r, 0.0)

    col_nonneg = [(A[:, i] >= 0).all() for i in range(N_ITEMS)]
    col_nonpos = [(A[:, i] <= 0).all() for i in range(N_ITEMS)]
    col_pos = [(A[:, i] > 0).all() for i in range(N_ITEMS)]

    caps = np.empty(N_ITEMS, dtype=np.int64)
    kmin = np.zeros(N_ITEMS, dtype=np.int64)
    for i in range(N_ITEMS):
        if col_pos[i] and all_nonneg:
            caps[i] = _exact_single_cap(A[:, i], b, z_cap)
        else:
            caps[i] = z_cap
        # a nonnegative column with nonpositive rate never helps; 0 is also
        # the lex-smaller tie choice
        if r[i] <= 0 and col_nonneg[i]:
            caps[i] = 0

    if not all_nonneg:
        # caps and row slacks interdepend through the negative entries;
        # iterating the bound system from z_cap shrinks both while staying
        # valid (monotone decrease from a valid start)
        neg = np.maximum(0.0, -A)
        for _ in range(4):
            for i in range(N_ITEMS):
                col = A[:, i]
                pos = col > 0
                if not pos.any() or caps[i] == 0:
                    continue
                other_slack = neg @ caps - neg[:, i] * caps[i]
                room = np.maximum(b + other_slack, 0.0)
                k = int(np.floor((room[pos] / col[pos]).min())) + 1
                caps[i] = min(caps[i], max(k, 0))

    for i in range(N_ITEMS):
        # a nonpositive column with positive rate only adds value and slack,
        # so it is pinned at its cap in every maximizer
        if r[i] > 0 and col_nonpos[i]:
            kmin[i] = caps[i]

    # greedy closure: with no exact zero rates and valid per-coordinate caps,
    # the coordinatewise greedy point is the unique maximizer when feasible
    if all_nonneg and (r != 0).all():
        zg = np.where(r > 0, caps, 0).astype(np.int64)
        loads = _consumption(A, zg[None, :])
        if (loads[0] <= b).all():
            return Decision(zg, float(_objective(c, q, b, zg[None, :], loads)[0]))

    z0 = np.zeros((1, N_ITEMS), dtype=np.int64)
    best_val = float(_objective(c, q, b, z0, _consumption(A, z0))[0])
    best_z = z0[0]

    mu = np.zeros(N_RESOURCES)
    if not all_nonneg:
        seed = _greedy_incumbent(A, c, b, q, r, caps, kmin)
        if seed is not None and seed[1] > best_val:
            best_z, best_val = seed
        qb = float(_objective(c, q, b, z0, _consumption(A, z0))[0])
        mu = _dual_multipliers(A, b, r, caps, best_val - qb)
    # Lagrangian completion rates (r_i - mu.A_i)+ for the mu-form bound
    lag_rates = np.maximum(r - mu @ A, 0.0)

    # optimistic slack each row can still gain from unassigned items
    slack = np.zeros((N_ITEMS + 1, N_RESOURCES))
    for i in range(N_ITEMS - 1, -1, -1):
        slack[i] = slack[i + 1] + np.maximum(0.0, -A[:, i]) * caps[i]

    Z = np.zeros((1, 0), dtype=np.int64)
    loads = np.zeros((1, N_RESOURCES))
    for i in range(N_ITEMS - 1):
        col = A[:, i]
        if col_pos[i]:
            kmax = _node_caps_exact(col, b, loads, int(caps[i]))
        else:
            kmax = _node_caps_mixed(col, b, loads, slack[i + 1], int(caps[i]))
        kmax = np.maximum(kmax, kmin[i])  # forced coordinates stay forced
        counts = kmax - kmin[i] + 1
        parent = np.repeat(np.arange(len(Z)), counts)
        ks = kmin[i] + _ragged_arange(counts)
        Z = np.column_stack([Z[parent], ks])
        loads = loads[parent] + np.outer(ks.astype(float), col)
        keep = (loads - slack[i + 1] <= b).all(axis=1)
        Z, loads = Z[keep], loads[keep]
        if len(Z) == 0:
            break
        # two admissible bounds on any completion; a node survives only if
        # both clear the incumbent
        cz_pre = (Z.astype(float) * c[: i + 1]).sum(axis=1)
        rem = b - loads
        ub = cz_pre + rem @ q
        ub_mu = ub + rem @ mu
        for i2 in range(i + 1, N_ITEMS):
            ub_mu = ub_mu + lag_rates[i2] * caps[i2]
            if rplus[i2] == 0.0 or caps[i2] == 0:
                continue
            col2 = A[:, i2]
            pos2 = col2 > 0
            if pos2.any():
                room = np.maximum(rem + slack[i + 1], 0.0)
                with np.errstate(divide="ignore"):
                    ratios = np.where(pos2, room / np.where(pos2, col2, 1.0), np.inf)
                ub_cap = np.clip(np.floor(ratios.min(axis=1)).astype(np.int64) + 1, 0, caps[i2])
            else:
                ub_cap = np.full(len(Z), caps[i2], dtype=np.int64)
            ub = ub + rplus[i2] * ub_cap
        keep = (ub >= best_val) & (ub_mu >= best_val)
        Z, loads = Z[keep], loads[keep]
        if len(Z) == 0:
            break

    if len(Z) > 0:
        best_val, best_z = _det_leaf_scan(A, c, b, q, mu, lag_rates, Z, loads,
                                          int(kmin[3]), int(caps[3]), col_pos[3],
                                          best_val, best_z)
    return Decision(best_z, best_val)


def _det_leaf_scan(A, c, b, q, mu, lag_rates, Z, loads, kmin3, cap3, col3_pos,
                   best_val, best_z, chunk=4096):
    col = A[:, 3]
    for lo in range(0, len(Z), chunk):
        Zc = Z[lo:lo + chunk]
        lc = loads[lo:lo + chunk]
        # re-prune the chunk against the current incumbent
        cz_pre = (Zc.astype(float) * c[:3]).sum(axis=1)
        rem = b - lc
        ub_mu = cz_pre + rem @ q + rem @ mu + lag_rates[3] * cap3
        keep = ub_mu >= best_val
        if not keep.all():
            Zc, lc, cz_pre = Zc[keep], lc[keep], cz_pre[keep]
        if len(Zc) == 0:
            continue
        if col3_pos:
            kmax = _node_caps_exact(col, b, lc, cap3)
        else:
            kmax = np.full(len(Zc), cap3, dtype=np.int64)
        kmax = np.maximum(kmax, kmin3)
        kk = np.arange(int(kmax.max()) + 1, dtype=np.int64)
        full_loads = lc[:, None, :] + kk[None, :, None].astype(float) * col[None, None, :]
        feas = ((full_loads <= b).all(axis=2)
                & (kk[None, :] <= kmax[:, None]) & (kk[None, :] >= kmin3))
        if not feas.any():
            continue
        Zf = Zc.astype(float)
        cz = ((c[0] * Zf[:, 0] + c[1] * Zf[:, 1]) + c[2] * Zf[:, 2])[:, None] + c[3] * kk[None, :].astype(float)
        m = np.maximum(b - full_loads, 0.0)
        vals = cz + ((q[0] * m[:, :, 0] + q[1] * m[:, :, 1]) + q[2] * m[:, :, 2])
        vals[~feas] = -np.inf
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_z = np.append(Zc[idx[0]], kk[idx[1]]).astype(np.int64)
    return best_val, best_z


def solve_chance(scenarios: ScenarioSet, inst: KnapsackInstance, z_cap: int = DEFAULT_Z_CAP) -> Decision:
    """Exact maximizer of the weighted feasible-scenario objective subject to
    the chance constraint (surviving weight >= alpha, tolerance 1e-12).

    The chance constraint is monotone (raising any z_i only breaks scenario
    feasibility), so each coordinate expands up to the largest count keeping
    the surviving weight above the target; z = 0 is always feasible.  Ties
    resolve to the lexicographically smallest z.
    """
    if z_cap < 0:
        raise ValueError("z_cap must be nonnegative")
    _solve_calls["chance"] += 1
    mats = scenarios.matrices
    w = scenarios.weights
    alpha = scenarios.alpha
    c, b, q = inst.c, inst.b, inst.q
    n_scen = scenarios.n

    # per-scenario profit rates for the completion bound
    rates = np.stack([c - mats[s].T @ q for s in range(n_scen)])  # (N, 4)
    rate_bound = w @ np.maximum(rates, 0.0)  # (4,)

    def chance_cap_for(loads, i):
        # largest k per node keeping surviving weight >= alpha - tol
        n = len(loads)
        col = mats[:, :, i]  # (N, 3)
        rem = b - loads      # (n, N, 3)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.floor(np.min(rem / col, axis=2))
        t = np.where(np.isfinite(t), t, -1.0)
        t = np.clip(t, -1, z_cap).astype(np.int64)
        up = ((loads + (t + 1)[:, :, None] * col) <= b).all(axis=2) & (t + 1 <= z_cap)
        t = t + up
        down = ((loads + t[:, :, None] * col) > b).any(axis=2) & (t >= 0)
        t = t - down
        order = np.argsort(-t, axis=1, kind="stable")
        tw = np.take_along_axis(np.broadcast_to(w, (n, n_scen)), order, axis=1)
        ts = np.take_along_axis(t, order, axis=1)
        cum = np.cumsum(tw, axis=1)
        ok = cum >= alpha - WEIGHT_TOL
        first = np.argmax(ok, axis=1)
        caps = np.clip(ts[np.arange(n), first], 0, z_cap)
        caps[~ok.any(axis=1)] = 0
        return caps

    def leaf_values(Zc, loads):
        # weighted objective over alive scenarios, canonical float grouping
        alive = (loads <= b).all(axis=2)
        Zf = Zc.astype(float)
        cz = ((c[0] * Zf[:, 0] + c[1] * Zf[:, 1]) + c[2] * Zf[:, 2]) + c[3] * Zf[:, 3]
        m = np.maximum(b - loads, 0.0)
        sal = (q[0] * m[:, :, 0] + q[1] * m[:, :, 1]) + q[2] * m[:, :, 2]
        per = (cz[:, None] + sal) * alive
        return (per * w).sum(axis=1), (alive * w).sum(axis=1)

    z0 = np.zeros((1, N_ITEMS), dtype=np.int64)
    loads0 = np.zeros((1, n_scen, N_RESOURCES))
    best_val = float(leaf_values(z0, loads0)[0][0])
    best_z = z0[0]

    Z = np.zeros((1, 0), dtype=np.int64)
    loads = loads0.copy()
    for i in range(N_ITEMS - 1):
        kmax = chance_cap_for(loads, i)
        counts = kmax + 1
        parent = np.repeat(np.arange(len(Z)), counts)
        ks = _ragged_arange(counts)
        Z = np.column_stack([Z[parent], ks])
        loads = loads[parent] + ks[:, None, None].astype(float) * mats[None, :, :, i]
        # admissible bound over completions
        alive = (loads <= b).all(axis=2)
        cz_pre = (Z.astype(float) * c[: i + 1]).sum(axis=1)
        rem_term = (b - loads) @ q
        ub = ((cz_pre[:, None] + rem_term) * alive * w).sum(axis=1)
        for i2 in range(i + 1, N_ITEMS):
            ub = ub + rate_bound[i2] * z_cap
        keep = ub >= best_val
        Z, loads = Z[keep], loads[keep]
        if len(Z) == 0:
            break

    if len(Z) > 0:
        col = mats[:, :, 3]
        chunk = max(1, 200000 // (n_scen * (z_cap + 1)))
        for lo in range(0, len(Z), chunk):
            Zc, lc = Z[lo:lo + chunk], loads[lo:lo + chunk]
            kmax = chance_cap_for(lc, 3)
            kk = np.arange(int(kmax.max()) + 1, dtype=np.int64)
            Zfull = np.column_stack([
                np.repeat(Zc, len(kk), axis=0),
                np.tile(kk, len(Zc)),
            ])
            lfull = (lc[:, None, :, :] + kk[None, :, None, None].astype(float)
                     * col[None, None, :, :]).reshape(-1, n_scen, N_RESOURCES)
            vals, surv = leaf_values(Zfull, lfull)
            valid = (np.tile(kk, len(Zc)) <= np.repeat(kmax, len(kk))) & (surv >= alpha - WEIGHT_TOL)
            vals[~valid] = -np.inf
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val = float(vals[j])
                best_z = Zfull[j].astype(np.int64)
    return Decision(best_z, best_val)


def hindsight_optimum(A_true, inst: KnapsackInstance, z_cap: int = DEFAULT_Z_CAP) -> Decision:
    """Best achievable reward under the realized weight matrix.

    True weight matrices have entries >= 1, which forces sum(z) <= max(b), so
    the search cap drops to that bound; matrices violating the guarantee fall
    back to the general cap.
    """
    A = _check_matrix(A_true)
    _solve_calls["hindsight"] += 1
    cap = int(np.ceil(inst.b.max())) if (A >= 1.0).all() else z_cap
    return _solve_det_engine(A, inst, cap)


def regret(z, A_true, inst: KnapsackInstance, hindsight_value: float | None = None) -> float:
    """Hindsight-optimal reward minus the realized reward of z; always >= 0."""
    if hindsight_value is None:
        hindsight_value = hindsight_optimum(A_true, inst).value
    reward, _ = evaluate_reward(z, A_true, inst)
    return hindsight_value - reward
