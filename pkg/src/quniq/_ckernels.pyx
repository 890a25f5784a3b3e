# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sin, pow, sqrt, fabs, INFINITY, NAN

cnp.import_array()

DEF POWER_EXP = 1
DEF END_POINT = 2

cdef double _INV_PHI = (sqrt(5.0) - 1.0) / 2.0
cdef double _INV_PHI2 = (3.0 - sqrt(5.0)) / 2.0
cdef double _BRACKET_LIMIT = 1.0e6


cdef inline double _lw(int code, double p0, double p1, double s) nogil:
    cdef double lg
    if code == POWER_EXP:
        return p0 * exp(p1 * s)
    if s > 1.0:
        lg = s + log1p(exp(1.0 - s))
    else:
        lg = 1.0 + log1p(exp(s - 1.0))
    return p1 * exp(s) / pow(lg, p0)


def log_weight_exp(int code, double p0, double p1, double s):
    return _lw(code, p0, p1, s)


cdef inline double _obj(int code, double p0, double p1, int n, double s) nogil:
    return n * s - _lw(code, p0, p1, s)


def moment_logs(int code, double p0, double p1, int n_max, double tol=1e-10):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] values = np.empty(n_max + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] argmax = np.empty(n_max + 1)
    cdef int n
    cdef double hi, f_hi, f_2hi, lo, dist, c, d, fc, fd, s, v, v0
    cdef bint divergent
    for n in range(n_max + 1):
        hi = 1.0
        f_hi = _obj(code, p0, p1, n, hi)
        divergent = False
        while True:
            f_2hi = _obj(code, p0, p1, n, 2.0 * hi)
            if f_2hi <= f_hi:
                break
            hi *= 2.0
            f_hi = f_2hi
            if hi > _BRACKET_LIMIT:
                divergent = True
                break
        if divergent:
            values[n] = NAN
            argmax[n] = INFINITY
            continue
        lo = 0.0
        hi = 2.0 * hi
        dist = hi - lo
        c = lo + _INV_PHI2 * dist
        d = lo + _INV_PHI * dist
        fc = _obj(code, p0, p1, n, c)
        fd = _obj(code, p0, p1, n, d)
        while dist > tol:
            if fc > fd:
                hi = d
                d = c
                fd = fc
                dist = hi - lo
                c = lo + _INV_PHI2 * dist
                fc = _obj(code, p0, p1, n, c)
            else:
                lo = c
                c = d
                fc = fd
                dist = hi - lo
                d = lo + _INV_PHI * dist
                fd = _obj(code, p0, p1, n, d)
        s = 0.5 * (lo + hi)
        v = _obj(code, p0, p1, n, s)
        v0 = _obj(code, p0, p1, n, 0.0)
        if v0 >= v:
            s = 0.0
            v = v0
        values[n] = v
        argmax[n] = s
    return values, argmax


def greedy_starts(a, b, double lo, double hi, double length, double tol=0.0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t i, m = av.shape[0], k = 0, cap = 16
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(cap)
    cdef double x, y, cur = -INFINITY
    for i in range(m):
        y = bv[i]
        if y < lo:
            continue
        x = av[i]
        if x > hi:
            break
        if x < lo:
            x = lo
        if y > hi:
            y = hi
        if x > cur + tol:
            if k == cap:
                cap *= 2
                out = np.resize(out, cap)
            out[k] = x
            k += 1
            cur = x + length
        while y > cur + tol:
            if k == cap:
                cap *= 2
                out = np.resize(out, cap)
            out[k] = cur
            k += 1
            cur = cur + length
    return out[:k].copy()


def separated_points(a, b, double lo, double hi, double sep):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t i, m = av.shape[0], k = 0, cap = 16
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(cap)
    cdef double x, y, p, last = -INFINITY
    for i in range(m):
        y = bv[i]
        if y < lo:
            continue
        x = av[i]
        if x > hi:
            break
        if x < lo:
            x = lo
        if y > hi:
            y = hi
        p = x if x > last + sep else last + sep
        while p <= y:
            if k == cap:
                cap *= 2
                out = np.resize(out, cap)
            out[k] = p
            k += 1
            last = p
            p = last + sep
    return out[:k].copy()


def sinc_product(xi, widths):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(xi, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(widths, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0])
    cdef Py_ssize_t i, j, n = xv.shape[0], m = wv.shape[0]
    cdef double acc, x
    with nogil:
        for i in range(n):
            acc = 1.0
            for j in range(m):
                x = wv[j] * xv[i]
                if fabs(x) < 1e-8:
                    acc *= 1.0 - x * x / 6.0
                else:
                    acc *= sin(x) / x
                if acc == 0.0:
                    break
            out[i] = acc
    return out.reshape(np.shape(xi))
