"""Pure-Python implementations of the hot loops.

These mirror ``_ckernels.pyx`` one-for-one and are used whenever the
compiled extension is unavailable (or ``QUNIQ_PURE=1`` is set).
"""

from __future__ import annotations

import math

import numpy as np

POWER_EXP = 1
END_POINT = 2

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0
_BRACKET_LIMIT = 1.0e6


def log_weight_exp(code: int, p0: float, p1: float, s: float) -> float:
    """log W(e^s) for the two analytic families (no [0,1] clamp)."""
    if code == POWER_EXP:
        return p0 * math.exp(p1 * s)
    # EndPoint: p0 = delta, p1 = c; log(e + e^s) computed without overflow
    if s > 1.0:
        lg = s + math.log1p(math.exp(1.0 - s))
    else:
        lg = 1.0 + math.log1p(math.exp(s - 1.0))
    return p1 * math.exp(s) / lg**p0


def _golden_max(code, p0, p1, n, lo, hi, tol):
    def f(s):
        return n * s - log_weight_exp(code, p0, p1, s)

    dist = hi - lo
    c = lo + _INV_PHI2 * dist
    d = lo + _INV_PHI * dist
    fc = f(c)
    fd = f(d)
    while dist > tol:
        if fc > fd:
            hi = d
            d = c
            fd = fc
            dist = hi - lo
            c = lo + _INV_PHI2 * dist
            fc = f(c)
        else:
            lo = c
            c = d
            fc = fd
            dist = hi - lo
            d = lo + _INV_PHI * dist
            fd = f(d)
    s = 0.5 * (lo + hi)
    v = f(s)
    v0 = f(0.0)
    if v0 >= v:
        return 0.0, v0
    return s, v


def moment_logs(code: int, p0: float, p1: float, n_max: int, tol: float = 1e-10):
    """Raw log-moments sup_{s>=0} (n s - log W(e^s)) for n = 0..n_max.

    Returns ``(values, argmax)``; a NaN value marks an unbounded objective.
    """
    values = np.empty(n_max + 1)
    argmax = np.empty(n_max + 1)
    for n in range(n_max + 1):
        hi = 1.0
        f_hi = n * hi - log_weight_exp(code, p0, p1, hi)
        divergent = False
        while True:
            f_2hi = n * 2.0 * hi - log_weight_exp(code, p0, p1, 2.0 * hi)
            if f_2hi <= f_hi:
                break
            hi *= 2.0
            f_hi = f_2hi
            if hi > _BRACKET_LIMIT:
                divergent = True
                break
        if divergent:
            values[n] = math.nan
            argmax[n] = math.inf
            continue
        s, v = _golden_max(code, p0, p1, n, 0.0, 2.0 * hi, tol)
        values[n] = v
        argmax[n] = s
    return values, argmax


def greedy_starts(a, b, lo: float, hi: float, length: float, tol: float = 0.0):
    """Left endpoints of the minimal greedy cover of ``[a_i, b_i] ∩ [lo, hi]``.

    ``a`` and ``b`` are sorted, disjoint. A point within ``tol`` of the
    current covered edge counts as covered.
    """
    starts = []
    cur = -math.inf
    for x, y in zip(a, b):
        if y < lo:
            continue
        if x > hi:
            break
        x = max(x, lo)
        y = min(y, hi)
        if x > cur + tol:
            starts.append(x)
            cur = x + length
        while y > cur + tol:
            starts.append(cur)
            cur = cur + length
    return np.asarray(starts, dtype=float)


def separated_points(a, b, lo: float, hi: float, sep: float):
    """Maximal ``sep``-separated subset of ``[a_i, b_i] ∩ [lo, hi]``, built left to right."""
    pts = []
    last = -math.inf
    for x, y in zip(a, b):
        if y < lo:
            continue
        if x > hi:
            break
        x = max(x, lo)
        y = min(y, hi)
        p = max(x, last + sep)
        while p <= y:
            pts.append(p)
            last = p
            p = last + sep
    return np.asarray(pts, dtype=float)


def sinc_product(xi, widths):
    """prod_k sin(w_k xi) / (w_k xi), evaluated pointwise."""
    xi = np.asarray(xi, dtype=float)
    out = np.ones_like(xi)
    for w in np.asarray(widths, dtype=float):
        out *= np.sinc(w * xi / math.pi)
    return out
