"""Per-anchor representation problem: a quadratic program over the simplex.

Each anchor is regressed on its stretched neighborhood under a weighted
l1 + squared-l2 penalty with coefficients confined to the probability
simplex.  On the simplex the weighted l1 term is linear, so the whole
objective collapses to

    f(beta) = 0.5 beta' H beta + g' beta + const,
    H = Xhat' Xhat + xi * diag(w)^2,   g = rho * w - Xhat' xbar_anchor,

minimized by projected gradient descent with fixed step 1/L.  A cheap
on-face refinement (one equality-constrained solve on the current support)
finishes off directions of tiny curvature, which arise whenever two members
stretch to nearly the same point.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import DegenerateNearest, NotConverged

CHUNK = 500


@dataclass
class SimplexProblem:
    """Quadratic program min 0.5 b'Hb + g'b over the probability simplex.

    ``constant`` is the part of the original least-squares objective that
    does not depend on beta (half the squared anchor norm), kept so reported
    objectives are true residual values.
    """

    hessian: np.ndarray
    linear: np.ndarray
    rho: float
    xi: float
    weights: np.ndarray
    constant: float = 0.0

    @property
    def size(self):
        return self.linear.size


@dataclass
class KktCertificate:
    """First-order optimality check for a feasible candidate.

    lam is the multiplier of the sum-to-one constraint fit to the support's
    stationarity equations, mu the nonnegativity multipliers.  ``passing``
    requires stationarity on the support, complementary slackness, and
    dual feasibility, all within ``tol``.
    """

    lam: float
    mu: np.ndarray
    stationarity: float
    complementarity: float
    dual_violation: float
    tol: float
    passing: bool


@dataclass
class SimplexSolution:
    beta: np.ndarray
    objective: float
    iterations: int
    certificate: KktCertificate
    converged: bool
    trace: list = field(default=None, repr=False)

    @property
    def support(self):
        return np.nonzero(self.beta > 0)[0]


def project_simplex(v):
    """Euclidean projection onto the probability simplex.

    Delegates to the active kernel backend; output entries are nonnegative
    and renormalized to sum to one exactly.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d array")
    return backend.simplex_project(v)


def assemble(neighborhood, anchor_unit, rho, xi):
    """Build the simplex QP for one anchor from its stretched neighborhood.

    Parameters
    ----------
    neighborhood : geometry.Neighborhood
    anchor_unit : (P,) ndarray
        The anchor on the unit sphere.
    rho : float
        Weighted-l1 penalty strength, nonnegative.
    xi : float
        Ridge strength, nonnegative; any positive value makes the problem
        strictly convex.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    X = neighborhood.stretched
    w = np.asarray(neighborhood.weights, dtype=np.float64)
    H = X.T @ X + xi * np.diag(w**2)
    H = (H + H.T) / 2.0
    g = rho * w - X.T @ anchor_unit
    const = 0.5 * float(anchor_unit @ anchor_unit)
    return SimplexProblem(
        hessian=np.ascontiguousarray(H),
        linear=np.ascontiguousarray(g),
        rho=float(rho),
        xi=float(xi),
        weights=w.copy(),
        constant=const,
    )


def objective_value(problem, beta):
    """Full objective at ``beta``, constant term included."""
    H, g = problem.hessian, problem.linear
    return float(0.5 * beta @ (H @ beta) + g @ beta + problem.constant)


def certify_kkt(problem, beta, tol=1e-6):
    """First-order optimality certificate for a candidate in the simplex.

    The equality multiplier is the least-squares fit of the support's
    stationarity equations; the inequality multipliers follow from it.
    """
    beta = np.asarray(beta, dtype=np.float64)
    grad = problem.hessian @ beta + problem.linear
    support = beta > 0
    if not support.any():
        raise ValueError("candidate has empty support; not in the simplex")
    lam = -float(np.mean(grad[support]))
    mu = grad + lam
    stationarity = float(np.max(np.abs(mu[support])))
    complementarity = float(np.max(np.abs(mu * beta)))
    dual_violation = float(max(0.0, -np.min(mu)))
    passing = (
        stationarity <= tol and complementarity <= tol and dual_violation <= tol
    )
    return KktCertificate(
        lam=lam,
        mu=mu,
        stationarity=stationarity,
        complementarity=complementarity,
        dual_violation=dual_violation,
        tol=tol,
        passing=passing,
    )


def _spectral_norm_upper(H):
    """Upper estimate of the largest eigenvalue by power iteration.

    Converged to 1e-6 relative tolerance, then inflated slightly so the
    1/L step cannot overshoot the true Lipschitz constant.
    """
    m = H.shape[0]
    v = np.ones(m) + np.linspace(0.0, 1e-3, m)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    for _ in range(500):
        w = H @ v
        nw = np.linalg.norm(w)
        if nw < 1e-30:
            break
        lam = float(v @ w)
        v = w / nw
        if abs(lam - lam_prev) <= 1e-6 * max(abs(lam), 1e-30):
            break
        lam_prev = lam
    return max(lam, 1e-12) * (1.0 + 1e-5)


def _face_solve(H, g, idx):
    """Equality-constrained minimizer on a support set.

    Solves the KKT system of min 0.5 b'Hb + g'b subject to sum(b)=1 with
    b supported on ``idx``.  Returns (b_on_support, lam) or None when the
    system is singular.
    """
    s = len(idx)
    K = np.empty((s + 1, s + 1))
    K[:s, :s] = H[np.ix_(idx, idx)]
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    K[s, s] = 0.0
    rhs = np.empty(s + 1)
    rhs[:s] = -g[idx]
    rhs[s] = 1.0
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:s], float(sol[s])


def _polish(H, g, beta):
    """Primal active-set refinement starting from a feasible iterate.

    Each round solves the face problem on the current support.  When the
    face minimizer is infeasible the iterate moves toward it only up to
    the first coordinate that hits zero, and that blocking coordinate
    leaves the support; when it is feasible the iterate jumps there and
    the off-support coordinate with the most negative multiplier enters.
    The face minimizer also minimizes the objective along the segment
    from the iterate, so every move is nonincreasing and the loop cannot
    cycle.  Returns the refined iterate (possibly unchanged).
    """
    m = beta.size
    x = beta.copy()
    support = list(np.nonzero(x > 0)[0])
    for _ in range(8 * m + 16):
        out = _face_solve(H, g, support)
        if out is None:
            break
        b, lam = out
        target = np.zeros(m)
        target[support] = b
        if np.min(b) >= -1e-12:
            x = np.maximum(target, 0.0)
            x /= x.sum()
            mu = H @ x + g + lam
            off = np.setdiff1d(np.arange(m), support, assume_unique=False)
            if off.size == 0:
                break
            j_add = off[int(np.argmin(mu[off]))]
            if mu[j_add] >= -1e-10:
                break
            support.append(int(j_add))
            continue
        drops = x - target
        blockers = [i for i in support if drops[i] > 1e-15]
        if not blockers:
            break
        steps = [x[i] / drops[i] for i in blockers]
        pos = int(np.argmin(steps))
        alpha = min(1.0, steps[pos])
        x = np.maximum(x + alpha * (target - x), 0.0)
        x[blockers[pos]] = 0.0
        x /= x.sum()
        support.remove(blockers[pos])
    return x


def solve(problem, init=None, step=None, tol=1e-8, max_iter=10_000,
          kkt_tol=1e-6, trace=False):
    """Minimize the simplex QP by fixed-step projected gradient descent.

    The step is 1/L with L estimated by power iteration unless ``step`` is
    given.  Iterations start at the nearest-neighbor vertex e1 (or ``init``)
    and stop when the sup-norm step difference reaches ``tol``, when the
    KKT certificate already passes at ``kkt_tol``, or when ``max_iter`` is
    spent; the last case raises NotConverged carrying the best iterate.
    Every few hundred iterations the iterate is refined by an active-set
    pass over its support, accepted only if the objective does not
    increase.

    With ``trace=True`` the per-iteration objective values are recorded on
    the returned solution (slower; meant for diagnostics and tests).
    """
    H, g = problem.hessian, problem.linear
    m = problem.size
    if init is None:
        beta = np.zeros(m)
        beta[0] = 1.0
    else:
        beta = np.ascontiguousarray(init, dtype=np.float64).copy()
        if beta.size != m or np.min(beta) < -1e-12 or abs(beta.sum() - 1) > 1e-8:
            raise ValueError("init must lie in the probability simplex")
    objs = [objective_value(problem, beta)] if trace else None
    if m == 1:
        cert = certify_kkt(problem, beta, kkt_tol)
        return SimplexSolution(beta, objective_value(problem, beta), 0, cert,
                               True, objs)
    if step is None:
        step = 1.0 / _spectral_norm_upper(H)
    total = 0
    while True:
        budget = max_iter - total
        chunk = 1 if trace else min(CHUNK, budget)
        done, delta = backend.pgd_chunk(H, g, beta, step, chunk, tol)
        total += done
        if trace:
            objs.append(objective_value(problem, beta))
        cand = _polish(H, g, beta)
        if cand is not None:
            cur = objective_value(problem, beta)
            new = objective_value(problem, cand)
            if new <= cur + 1e-12 * (1.0 + abs(cur)):
                if trace and new < cur:
                    objs.append(new)
                beta = cand
        cert = certify_kkt(problem, beta, kkt_tol)
        if cert.passing or delta <= tol:
            return SimplexSolution(beta, objective_value(problem, beta), total,
                                   cert, True, objs)
        if total >= max_iter:
            best = SimplexSolution(beta, objective_value(problem, beta), total,
                                   cert, False, objs)
            raise NotConverged(total, delta, best)


def rho_lower_bound(neighborhood, anchor_unit, xi):
    """Penalty strength above which the nearest-neighbor vertex is optimal.

    For each member j strictly farther than the nearest one, the vertex e1
    beats the direction toward j once

        rho > [(xhat1 - xhatj)'(xhat1 - xbar_i) + xi * w1^2] / (wj - w1),

    so the returned value is the max of those ratios clipped at zero.
    Members tied with the nearest weight contribute no term.

    Raises
    ------
    DegenerateNearest
        If the nearest stretched member coincides with another member or
        with the anchor itself, which the bound's derivation excludes.
    """
    X = neighborhood.stretched
    w = np.asarray(neighborhood.weights, dtype=np.float64)
    m = w.size
    if m == 0:
        raise ValueError("empty neighborhood")
    x1 = X[:, 0]
    if np.linalg.norm(x1 - anchor_unit) <= 1e-12:
        raise DegenerateNearest("nearest member stretches onto the anchor")
    if m == 1:
        return 0.0
    coincident = np.linalg.norm(X[:, 1:] - x1[:, None], axis=0) <= 1e-12
    if coincident.any():
        raise DegenerateNearest("nearest member is not unique")
    numer = (x1 - anchor_unit) @ (x1[:, None] - X[:, 1:]) + xi * w[0] ** 2
    denom = w[1:] - w[0]
    keep = denom > 0
    if not keep.any():
        return 0.0
    return float(max(0.0, np.max(numer[keep] / denom[keep])))


def trivial_solution_condition(neighborhood, anchor_unit, xi=0.0):
    """Geometric test for the nearest vertex being optimal at any penalty.

    True when every stretched member lies on the far side of the
    hyperplane through the nearest one (normal pointing at the anchor),
    with enough margin to absorb the ridge term:

        (xhat_1 - xhat_j)'(xhat_1 - xbar_i) + xi * w1^2 <= 0   for all j.

    This is exactly the condition under which the vertex e1 solves the
    program for every rho > 0: it makes all directional derivatives at e1
    nonnegative in the limit rho -> 0, and the penalty only helps e1.
    The supporting-hyperplane picture is the same one that motivates the
    penalty lower bound; here the bound degenerates to zero.
    """
    X = neighborhood.stretched
    if X.shape[1] < 2:
        return True
    x1 = X[:, 0]
    num = (x1 - anchor_unit) @ (x1[:, None] - X[:, 1:])
    num = num + xi * float(neighborhood.weights[0]) ** 2
    return bool(np.all(num <= 0.0))
