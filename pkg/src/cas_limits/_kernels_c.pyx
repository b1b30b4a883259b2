# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: penalized Blahut-Arimoto capacity and
rate-distortion iterations. Mirrors ``_kernels_py.py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

cdef double _LOG_FLOOR = 1e-300


def ba_capacity(w, penalty, double tol=1e-12, long max_iter=100_000):
    """See ``_kernels_py.ba_capacity``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pen = np.ascontiguousarray(penalty, dtype=np.float64)
    cdef Py_ssize_t nx = wv.shape[0], ny = wv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.full(nx, 1.0 / nx)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wlogw = np.zeros(nx)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] py = np.zeros(ny)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] score = np.zeros(nx)
    cdef Py_ssize_t x, y
    cdef long it = 0
    cdef double acc, m, s, wxy

    for x in range(nx):
        acc = 0.0
        for y in range(ny):
            wxy = wv[x, y]
            if wxy > 0.0:
                acc += wxy * log(wxy + _LOG_FLOOR)
        wlogw[x] = acc

    for it in range(1, max_iter + 1):
        for y in range(ny):
            acc = 0.0
            for x in range(nx):
                acc += p[x] * wv[x, y]
            py[y] = log(acc + _LOG_FLOOR)
        m = -1e308
        for x in range(nx):
            acc = wlogw[x] - pen[x]
            for y in range(ny):
                if wv[x, y] > 0.0:
                    acc -= wv[x, y] * py[y]
            score[x] = acc
            if acc > m:
                m = acc
        s = 0.0
        for x in range(nx):
            p[x] = p[x] * exp(score[x] - m)
            s += p[x]
        for x in range(nx):
            p[x] /= s
        if -log(s) < tol:
            break
    return p, it


def ba_rate_distortion(p, d, double beta, double tol=1e-13, long max_iter=100_000):
    """See ``_kernels_py.ba_rate_distortion``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t m = dv.shape[0], n = dv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.exp(-beta * dv)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.full(n, 1.0 / n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.zeros(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cond = np.zeros((m, n))
    cdef Py_ssize_t i, j, k
    cdef long it = 0
    cdef double acc, gmax, s, dist, rate, pi

    for it in range(1, max_iter + 1):
        for i in range(m):
            if pv[i] <= 0.0:
                continue
            acc = 0.0
            for j in range(n):
                acc += a[i, j] * q[j]
            c[i] = acc
        for j in range(n):
            acc = 0.0
            for i in range(m):
                if pv[i] > 0.0:
                    acc += pv[i] * a[i, j] / (c[i] + _LOG_FLOOR)
            g[j] = acc
        s = 0.0
        gmax = _LOG_FLOOR
        for j in range(n):
            q[j] *= g[j]
            s += q[j]
            if g[j] > gmax:
                gmax = g[j]
        for j in range(n):
            q[j] /= s
        if log(gmax) < tol:
            break

    dist = 0.0
    rate = 0.0
    for i in range(m):
        pi = pv[i]
        if pi <= 0.0:
            # point mass on the cheapest column
            acc = dv[i, 0]
            j = 0
            for k in range(1, n):
                if dv[i, k] < acc:
                    acc = dv[i, k]
                    j = k
            cond[i, j] = 1.0
            continue
        acc = 0.0
        for j in range(n):
            acc += a[i, j] * q[j]
        c[i] = acc
        rate -= pi * log(acc + _LOG_FLOOR)
        for j in range(n):
            cond[i, j] = q[j] * a[i, j] / (acc + _LOG_FLOOR)
            dist += pi * cond[i, j] * dv[i, j]
    rate -= beta * dist
    if rate < 0.0:
        rate = 0.0
    return cond, rate, dist, it
