"""Pure-NumPy implementations of the hot iterative kernels.

These mirror the compiled extension in ``_kernels_c.pyx``; the backend is
selected at import time in ``kernels.py``.
"""

import numpy as np

_LOG_FLOOR = 1e-300


def ba_capacity(w, penalty, tol=1e-12, max_iter=100_000):
    """Penalized Blahut-Arimoto input-distribution update.

    Maximizes I(p; w) - sum_x p(x) penalty(x) over the simplex, where
    w[x, y] is the channel law. Convergence is certified by the gap
    between the standard per-iteration upper and lower bounds on the
    penalized objective.

    Returns (p, iterations).
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    penalty = np.ascontiguousarray(penalty, dtype=np.float64)
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    wlogw = np.where(w > 0.0, w * np.log(w + _LOG_FLOOR), 0.0).sum(axis=1)
    it = 0
    for it in range(1, max_iter + 1):
        py = p @ w
        score = wlogw - w @ np.log(py + _LOG_FLOOR) - penalty
        m = score.max()
        r = p * np.exp(score - m)
        s = r.sum()
        p = r / s
        # upper bound = max(score); lower bound = m + log(s); gap = -log(s)
        if -np.log(s) < tol:
            break
    return p, it


def ba_rate_distortion(p, d, beta, tol=1e-13, max_iter=100_000):
    """Blahut-Arimoto rate-distortion point at slope parameter beta.

    Minimizes I + beta * E[d] over test channels for source p and
    distortion matrix d[i, j]. Zero-mass source rows are excluded from
    the iteration and returned as point masses on their cheapest column.

    Returns (cond, rate, dist, iterations) with cond[i, j] = P(j | i).
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    m, n = d.shape
    active = p > 0.0
    pa = p[active]
    a = np.exp(-beta * d[active])
    q = np.full(n, 1.0 / n)
    it = 0
    for it in range(1, max_iter + 1):
        c = a @ q
        g = (pa / (c + _LOG_FLOOR)) @ a
        q = q * g
        q /= q.sum()
        if np.log(max(g.max(), _LOG_FLOOR)) < tol:
            break
    c = a @ q
    cond_a = q[None, :] * a / (c[:, None] + _LOG_FLOOR)
    dist = float(np.einsum("i,ij,ij->", pa, cond_a, d[active]))
    # log(cond/q) = -beta*d - log(c), so I = -beta*dist - sum_i p_i log c_i
    rate = float(-beta * dist - pa @ np.log(c + _LOG_FLOOR))
    rate = max(rate, 0.0)
    cond = np.zeros((m, n))
    cond[active] = cond_a
    if not active.all():
        idle = np.flatnonzero(~active)
        cond[idle, d[idle].argmin(axis=1)] = 1.0
    return cond, rate, dist, it
