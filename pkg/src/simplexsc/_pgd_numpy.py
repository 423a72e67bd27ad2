"""Pure-numpy kernel for the projected-gradient inner loop.

Drop-in fallback for the compiled module ``_pgd_core``; both expose
``simplex_project`` and ``pgd_chunk`` with identical semantics.
"""

import numpy as np


def simplex_project(v):
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold method: find the largest k such that the top-k
    entries stay positive after sharing the surplus, clip the rest to
    zero.  The result is renormalized so it sums to one exactly.

    Parameters
    ----------
    v : (m,) ndarray

    Returns
    -------
    (m,) ndarray on the unit simplex.
    """
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    hits = np.nonzero(u - css / ks > 0.0)[0]
    k = hits[-1] + 1
    tau = css[k - 1] / k
    out = np.maximum(v - tau, 0.0)
    return out / out.sum()


def pgd_chunk(H, g, beta, step, max_iter, tol):
    """Run up to ``max_iter`` projected-gradient steps in place.

    beta <- project(beta - step * (H beta + g)), repeated until the
    sup-norm step difference drops to ``tol`` or the iteration budget is
    spent.

    Returns
    -------
    (iterations_done, last_delta)
    """
    delta = np.inf
    it = 0
    while it < max_iter:
        new = simplex_project(beta - step * (H @ beta + g))
        delta = float(np.max(np.abs(new - beta)))
        beta[:] = new
        it += 1
        if delta <= tol:
            break
    return it, delta
