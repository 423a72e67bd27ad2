# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the projected-gradient inner loop.

Mirrors ``_pgd_numpy``: ``simplex_project`` and ``pgd_chunk`` with the same
signatures and semantics, minus the per-iteration Python overhead.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef void _sort_desc(double* a, Py_ssize_t m) noexcept nogil:
    # insertion sort; member counts stay small so O(m^2) is fine here
    cdef Py_ssize_t i, j
    cdef double key
    for i in range(1, m):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j] < key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef void _project(double* v, double* srt, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double css, t, tau, total
    for i in range(m):
        srt[i] = v[i]
    _sort_desc(srt, m)
    css = 0.0
    tau = 0.0
    k = 0
    for i in range(m):
        css += srt[i]
        t = (css - 1.0) / (i + 1)
        if srt[i] - t > 0.0:
            tau = t
            k = i + 1
    total = 0.0
    for i in range(m):
        v[i] = v[i] - tau
        if v[i] < 0.0:
            v[i] = 0.0
        total += v[i]
    for i in range(m):
        v[i] = v[i] / total


def simplex_project(v):
    """Euclidean projection of ``v`` onto the probability simplex."""
    cdef cnp.ndarray[double, ndim=1] out = np.ascontiguousarray(v, dtype=np.float64).copy()
    cdef cnp.ndarray[double, ndim=1] work = np.empty(out.shape[0], dtype=np.float64)
    _project(&out[0], &work[0], out.shape[0])
    return out


def pgd_chunk(double[:, ::1] H, double[::1] g, double[::1] beta,
              double step, int max_iter, double tol):
    """Run up to ``max_iter`` projected-gradient steps in place on ``beta``.

    Returns (iterations_done, last_delta).
    """
    cdef Py_ssize_t m = beta.shape[0]
    cdef cnp.ndarray[double, ndim=1] cand_arr = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] work_arr = np.empty(m, dtype=np.float64)
    cdef double* cand = &cand_arr[0]
    cdef double* work = &work_arr[0]
    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef double s, d, delta
    delta = np.inf
    with nogil:
        while it < max_iter:
            for i in range(m):
                s = g[i]
                for j in range(m):
                    s += H[i, j] * beta[j]
                cand[i] = beta[i] - step * s
            _project(cand, work, m)
            delta = 0.0
            for i in range(m):
                d = cand[i] - beta[i]
                if d < 0.0:
                    d = -d
                if d > delta:
                    delta = d
                beta[i] = cand[i]
            it += 1
            if delta <= tol:
                break
    return it, delta
