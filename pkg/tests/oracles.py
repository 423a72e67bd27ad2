"""Independent reference implementations used only by the tests.

Everything here is deliberately written from scratch (brute force,
exhaustive enumeration, bisection) so production code can be checked
against a second route that shares none of its internals.
"""

import itertools
import math

import numpy as np


def project_simplex_bisection(v, iters=200):
    """Simplex projection by bisecting the water level.

    The projection is max(v - tau, 0) for the tau making the sum one;
    that sum is continuous and nonincreasing in tau, so bisection on tau
    converges geometrically.
    """
    v = np.asarray(v, dtype=np.float64)
    lo = float(np.min(v)) - 1.0 / v.size - 1.0
    hi = float(np.max(v))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0.0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


def project_simplex_grid(v, step=1e-3):
    """Brute-force grid search over the simplex, for 2 or 3 coordinates."""
    v = np.asarray(v, dtype=np.float64)
    ticks = np.arange(0.0, 1.0 + step / 2, step)
    best, best_d = None, np.inf
    if v.size == 2:
        for a in ticks:
            cand = np.array([a, 1.0 - a])
            d = np.sum((cand - v) ** 2)
            if d < best_d:
                best, best_d = cand, d
    elif v.size == 3:
        for a in ticks:
            for b in np.arange(0.0, 1.0 - a + step / 2, step):
                cand = np.array([a, b, 1.0 - a - b])
                d = np.sum((cand - v) ** 2)
                if d < best_d:
                    best, best_d = cand, d
    else:
        raise ValueError("grid oracle only supports 2 or 3 coordinates")
    return best


def enumerate_simplex_qp(H, g):
    """Global minimum of 0.5 b'Hb + g'b over the simplex by support
    enumeration.

    Every nonempty support set gets its equality-constrained stationary
    point; feasible ones compete on objective value.  The true optimum's
    support always yields a feasible stationary point, so the best
    candidate is the global solution.  Exponential in len(g); use small
    problems only.
    """
    H = np.asarray(H, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    m = g.size
    best_beta, best_obj = None, np.inf
    for r in range(1, m + 1):
        for combo in itertools.combinations(range(m), r):
            idx = list(combo)
            K = np.zeros((r + 1, r + 1))
            K[:r, :r] = H[np.ix_(idx, idx)]
            K[:r, r] = 1.0
            K[r, :r] = 1.0
            rhs = np.concatenate([-g[idx], [1.0]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            b = sol[:r]
            if b.min() < -1e-10:
                continue
            beta = np.zeros(m)
            beta[idx] = np.maximum(b, 0.0)
            beta /= beta.sum()
            obj = 0.5 * beta @ H @ beta + g @ beta
            if obj < best_obj:
                best_beta, best_obj = beta, obj
    return best_beta, best_obj


def brute_neighborhood(points, anchor, k, ortho_tol=1e-12):
    """Plain-python rebuild of the k-nearest stretched neighborhood.

    Returns (members, weights, stretched_columns) with ties broken by
    lower index, orthogonal points dropped.
    """
    pts = [list(map(float, row)) for row in points]
    n = len(pts)
    norms = [math.sqrt(math.fsum(c * c for c in row)) for row in pts]
    unit = [[c / norms[i] for c in row] for i, row in enumerate(pts)]
    a = unit[anchor]
    entries = []
    for j in range(n):
        if j == anchor:
            continue
        cos = math.fsum(x * y for x, y in zip(unit[j], a))
        if abs(cos) < ortho_tol:
            continue
        entries.append((1.0 / abs(cos), j, cos))
    entries.sort(key=lambda e: (e[0], e[1]))
    entries = entries[: min(k, len(entries))]
    members = [j for _, j, _ in entries]
    weights = [d for d, _, _ in entries]
    stretched = [[c / cos for c in unit[j]] for _, j, cos in entries]
    return members, weights, stretched


def accuracy_by_permutation(pred, truth):
    """Best label-matching accuracy by trying every permutation."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    pvals = sorted(set(pred.tolist()))
    tvals = sorted(set(truth.tolist()))
    size = max(len(pvals), len(tvals))
    best = 0.0
    for perm in itertools.permutations(range(size)):
        hits = 0
        for p, t in zip(pred, truth):
            pi = pvals.index(p)
            mapped = perm[pi]
            if mapped < len(tvals) and tvals[mapped] == t:
                hits += 1
        best = max(best, hits / pred.size)
    return best


def best_mapping_by_permutation(cost):
    """Minimum-cost class-to-cluster assignment by exhaustive search.

    cost[c, k] is the price of sending class c to cluster k; returns the
    (mapping tuple, total) with mapping[c] = k.
    """
    cost = np.asarray(cost, dtype=np.float64)
    K = cost.shape[0]
    best_perm, best_total = None, np.inf
    for perm in itertools.permutations(range(K)):
        total = sum(cost[c, perm[c]] for c in range(K))
        if total < best_total:
            best_perm, best_total = perm, total
    return best_perm, best_total


def reconstruction_error_fsum(points, basis):
    """Extended-precision total squared residual against a basis."""
    total = []
    per_point = []
    B = np.asarray(basis, dtype=np.float64)
    for row in np.asarray(points, dtype=np.float64):
        proj = B @ (B.T @ row)
        val = math.fsum(float(d) * float(d) for d in row - proj)
        per_point.append(val)
        total.append(val)
    return per_point, math.fsum(total)
