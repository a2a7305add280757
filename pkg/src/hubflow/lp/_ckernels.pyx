# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex inner kernels; see ``_pykernels`` for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

cnp.import_array()

cdef enum:
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3


def eta_ftran(double[::1] x, cnp.int64_t[::1] rows, double[::1] pivots, cnp.int64_t[::1] starts,
              cnp.int64_t[::1] idx, double[::1] vals, Py_ssize_t count):
    cdef Py_ssize_t k, j, r
    cdef double xr
    for k in range(count):
        r = rows[k]
        xr = x[r] / pivots[k]
        x[r] = xr
        if xr != 0.0:
            for j in range(starts[k], starts[k + 1]):
                x[idx[j]] -= vals[j] * xr


def eta_btran(double[::1] y, cnp.int64_t[::1] rows, double[::1] pivots, cnp.int64_t[::1] starts,
              cnp.int64_t[::1] idx, double[::1] vals, Py_ssize_t count):
    cdef Py_ssize_t k, j, r
    cdef double acc
    for k in range(count - 1, -1, -1):
        r = rows[k]
        acc = 0.0
        for j in range(starts[k], starts[k + 1]):
            acc += vals[j] * y[idx[j]]
        y[r] = (y[r] - acc) / pivots[k]


# score = max(lo[state] * d, hi[state] * d): -d at lower, d at upper, |d| when free, 0 otherwise
cdef double _LO[5]
cdef double _HI[5]
_LO[:] = [0.0, -1.0, 1.0, -1.0, 0.0]
_HI[:] = [0.0, -1.0, 1.0, 1.0, 0.0]


def select_entering(double[::1] d, signed char[::1] state, double tol, bint bland):
    cdef Py_ssize_t j, n = d.shape[0], best_j = -1
    cdef double best = tol, score, dj, a, b
    cdef signed char st
    for j in range(n):
        st = state[j]
        dj = d[j]
        a = _LO[st] * dj
        b = _HI[st] * dj
        score = a if a > b else b
        if score > best:
            if bland:
                return j
            best = score
            best_j = j
    return best_j


def ratio_test(double[::1] xb, double[::1] lb, double[::1] ub, double[::1] alpha,
               double direction, double pivot_tol, cnp.int64_t[::1] basis, double tie_tol):
    cdef Py_ssize_t i, m = xb.shape[0], r = -1
    cdef double a, t, best = INFINITY, lim
    cdef bint up = False
    # pass 1: minimum ratio
    for i in range(m):
        a = direction * alpha[i]
        if a > pivot_tol:
            if not isfinite(lb[i]):
                continue
            t = (xb[i] - lb[i]) / a
        elif a < -pivot_tol:
            if not isfinite(ub[i]):
                continue
            t = (ub[i] - xb[i]) / (-a)
        else:
            continue
        if t < 0.0:
            t = 0.0
        if t < best:
            best = t
    if not isfinite(best):
        return -1, INFINITY, False
    lim = best + tie_tol * (best if best > 1.0 else 1.0)
    best = INFINITY
    # pass 2: lowest variable index among ties
    for i in range(m):
        a = direction * alpha[i]
        if a > pivot_tol:
            if not isfinite(lb[i]):
                continue
            t = (xb[i] - lb[i]) / a
        elif a < -pivot_tol:
            if not isfinite(ub[i]):
                continue
            t = (ub[i] - xb[i]) / (-a)
        else:
            continue
        if t < 0.0:
            t = 0.0
        if t <= lim and (r < 0 or basis[i] < basis[r]):
            r = i
            best = t
            up = a < -pivot_tol
    return r, best, up
