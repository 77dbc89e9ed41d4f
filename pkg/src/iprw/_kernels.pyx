# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: frontier growth, causal convolution, renewal solve.

Semantics are mirrored line for line by ``_fallback.py``.
"""

import numpy as np

cdef enum:
    DONE = 0
    NEED_DRAWS = 1
    NEED_SPACE = 2
    RUNAWAY = 3


def advance(const double[::1] parents, Py_ssize_t p, double s_abs, long long k,
            double horizon, const double[::1] xi, const double[::1] eta,
            Py_ssize_t pos, double[::1] out, Py_ssize_t n_out, long long step_cap):
    cdef Py_ssize_t n_par = parents.shape[0]
    cdef Py_ssize_t n_buf = xi.shape[0]
    cdef Py_ssize_t cap = out.shape[0]
    cdef double b
    while p < n_par:
        while s_abs <= horizon:
            if pos == n_buf:
                return p, s_abs, k, pos, n_out, NEED_DRAWS
            if n_out == cap:
                return p, s_abs, k, pos, n_out, NEED_SPACE
            if k >= step_cap:
                return p, s_abs, k, pos, n_out, RUNAWAY
            b = s_abs + eta[pos]
            if b <= horizon:
                out[n_out] = b
                n_out += 1
            s_abs = s_abs + xi[pos]
            pos += 1
            k += 1
        p += 1
        k = 0
        if p < n_par:
            s_abs = parents[p]
    return p, s_abs, k, pos, n_out, DONE


cdef inline double _dot_comp(const double* a, const double* b_rev_end, Py_ssize_t n) nogil:
    """sum_{i<n} a[i] * b_rev_end[-i], four lanes of branch-free TwoSum."""
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0
    cdef double x, t, bp
    cdef Py_ssize_t i = 0
    while i + 4 <= n:
        x = a[i] * b_rev_end[-i]
        t = s0 + x
        bp = t - s0
        c0 += (s0 - (t - bp)) + (x - bp)
        s0 = t
        x = a[i + 1] * b_rev_end[-i - 1]
        t = s1 + x
        bp = t - s1
        c1 += (s1 - (t - bp)) + (x - bp)
        s1 = t
        x = a[i + 2] * b_rev_end[-i - 2]
        t = s2 + x
        bp = t - s2
        c2 += (s2 - (t - bp)) + (x - bp)
        s2 = t
        x = a[i + 3] * b_rev_end[-i - 3]
        t = s3 + x
        bp = t - s3
        c3 += (s3 - (t - bp)) + (x - bp)
        s3 = t
        i += 4
    while i < n:
        x = a[i] * b_rev_end[-i]
        t = s0 + x
        bp = t - s0
        c0 += (s0 - (t - bp)) + (x - bp)
        s0 = t
        i += 1
    # fold lanes with one more compensated pass
    t = s0 + s1
    bp = t - s0
    c0 += (s0 - (t - bp)) + (s1 - bp)
    s0 = t
    t = s2 + s3
    bp = t - s2
    c2 += (s2 - (t - bp)) + (s3 - bp)
    s2 = t
    t = s0 + s2
    bp = t - s0
    c0 += (s0 - (t - bp)) + (s2 - bp)
    return t + (c0 + c1 + c2 + c3)


def causal_conv(const double[::1] a, const double[::1] b):
    """c_k = sum_{i<=k} a_i b_{k-i} for k < len(a), compensated summation."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] c = out
    if n == 0:
        return out
    with nogil:
        for k in range(n):
            c[k] = _dot_comp(&a[0], &b[k], k + 1)
    return out


def renewal_solve(const double[::1] dF, bint trapezoid):
    """Solve U_k = 1 + sum_{i=1}^k dF_i w_{k-i} with w = U (node rule) or
    w_m = (U_m + U_{m+1}) / 2 (trapezoid rule, implicit in U_k)."""
    cdef Py_ssize_t n = dF.shape[0]
    cdef Py_ssize_t k
    cdef double s, d1
    out = np.zeros(n, dtype=np.float64)
    w_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] u = out
    cdef double[::1] w = w_arr
    if n == 0:
        return out
    u[0] = 1.0
    d1 = dF[1] if n > 1 else 0.0
    with nogil:
        for k in range(1, n):
            if trapezoid:
                s = _dot_comp(&dF[2], &w[k - 2], k - 1) if k >= 2 else 0.0
                u[k] = (1.0 + s + 0.5 * d1 * u[k - 1]) / (1.0 - 0.5 * d1)
                w[k - 1] = 0.5 * (u[k - 1] + u[k])
            else:
                s = _dot_comp(&dF[1], &u[k - 1], k)
                u[k] = 1.0 + s
    return out
