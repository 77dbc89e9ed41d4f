"""Pure-Python/numpy versions of the compiled kernels.

``advance`` reproduces the compiled loop exactly (same float operations in
the same order), so simulation output does not depend on which backend is
active. The grid kernels use numpy reductions and agree to rounding.
"""

from __future__ import annotations

import numpy as np

DONE, NEED_DRAWS, NEED_SPACE, RUNAWAY = 0, 1, 2, 3


def advance(parents, p, s_abs, k, horizon, xi, eta, pos, out, n_out, step_cap):
    n_par = len(parents)
    n_buf = len(xi)
    cap = len(out)
    par = parents.tolist()
    xs = xi.tolist()
    es = xs if eta is xi else eta.tolist()
    s_abs = float(s_abs)
    horizon = float(horizon)
    while p < n_par:
        while s_abs <= horizon:
            if pos == n_buf:
                return p, s_abs, k, pos, n_out, NEED_DRAWS
            if n_out == cap:
                return p, s_abs, k, pos, n_out, NEED_SPACE
            if k >= step_cap:
                return p, s_abs, k, pos, n_out, RUNAWAY
            b = s_abs + es[pos]
            if b <= horizon:
                out[n_out] = b
                n_out += 1
            s_abs = s_abs + xs[pos]
            pos += 1
            k += 1
        p += 1
        k = 0
        if p < n_par:
            s_abs = par[p]
    return p, s_abs, k, pos, n_out, DONE


def causal_conv(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.convolve(a, b)[: len(a)]


def renewal_solve(dF, trapezoid):
    dF = np.asarray(dF, dtype=float)
    n = len(dF)
    u = np.zeros(n)
    if n == 0:
        return u
    u[0] = 1.0
    if trapezoid:
        d1 = dF[1] if n > 1 else 0.0
        w = np.zeros(n)
        for k in range(1, n):
            s = float(np.dot(dF[2 : k + 1], w[k - 2 :: -1])) if k >= 2 else 0.0
            u[k] = (1.0 + s + 0.5 * d1 * u[k - 1]) / (1.0 - 0.5 * d1)
            w[k - 1] = 0.5 * (u[k - 1] + u[k])
    else:
        for k in range(1, n):
            u[k] = 1.0 + float(np.dot(dF[1 : k + 1], u[k - 1 :: -1]))
    return u
