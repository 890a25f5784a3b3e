"""Independent reference computations used by the tests.

These are written without calling into the package's algorithms: dense grid
searches, direct loops and closed forms. Their outputs are frozen in the
tests as literal expectations where a closed form exists.
"""

from __future__ import annotations

import functools
import math

import numpy as np


def grid_log_moment(log_w, n: int, t_max: float = 1e3, points: int = 200_001) -> float:
    """``max_{1 <= t <= t_max} n log t - log W(t)`` by dense grid plus local refinement."""
    t = np.exp(np.linspace(0.0, math.log(t_max), points))
    vals = n * np.log(t) - np.array([log_w(x) for x in t])
    i = int(np.argmax(vals))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, points - 1)]
    fine = np.linspace(lo, hi, 20_001)
    fvals = n * np.log(fine) - np.array([log_w(x) for x in fine])
    return float(max(vals.max(), fvals.max()))


def bang_scan(mu, lam: float) -> int:
    """Direct loop for the largest ``N`` with ``sum_{lam < n <= N} mu_n < e``."""
    total = 0.0
    n = 0
    while n <= lam:
        n += 1
    N = n - 1
    while n < len(mu):
        total += mu[n]
        if total >= math.e:
            return N
        N = n
        n += 1
    raise RuntimeError("range exhausted")


def theta1_straight(log_m, lam: float, s: float) -> float:
    """``2n (log 4 + 4 + 4 gamma(2n) - log s)`` with every piece spelled out."""
    mu = [math.nan] + [math.exp(log_m[k - 1] - log_m[k]) for k in range(1, len(log_m))]
    n = bang_scan(mu, lam)
    if n == 0:
        return 0.0
    gam = 0.0
    for j in range(1, 2 * n + 1):
        ratio = math.exp(log_m[j + 1] + log_m[j - 1] - 2 * log_m[j])
        gam = max(gam, j * (ratio - 1.0))
    return 2 * n * (math.log(4.0) + 4.0 + 4.0 * gam - math.log(s))


def gram_sigma_two_freqs(N: int, q0: int, q1: int, space: list[int]) -> float:
    """Closed-form smallest singular value for a two-frequency set.

    The Gram matrix is ``[[a, g], [conj(g), a]]`` with ``a = |E|/N`` and
    ``g = N**-1 sum_{x in E} exp(2 pi i (q1 - q0) x / N)``; its eigenvalues
    are ``a -+ |g|``.
    """
    a = len(space) / N
    g = sum(complex(math.cos(2 * math.pi * (q1 - q0) * x / N),
                    math.sin(2 * math.pi * (q1 - q0) * x / N)) for x in space) / N
    return math.sqrt(a - abs(g))


def dp_min_cover(intervals: list[tuple[int, int]], ell: int) -> int:
    """Exhaustive minimum number of length-``ell`` intervals covering a union of
    integer intervals, trying every integer start for the interval that covers
    the leftmost uncovered point."""
    ivs = sorted(intervals)

    def first_after(x):
        # infimum of the set strictly right of x, or None
        for a, b in ivs:
            if b > x:
                return max(a, x)
        return None

    @functools.lru_cache(maxsize=None)
    def g(covered_to):
        y = first_after(covered_to)
        if y is None:
            return 0
        best = math.inf
        for s in range(y - ell, y + 1):
            if s + ell > covered_to:
                best = min(best, 1 + g(s + ell))
        return best

    if not ivs:
        return 0
    return g(ivs[0][0] - 1)


def point_sets_min_cover(points: list[int], ell: int) -> int:
    """Exhaustive minimum cover for a finite integer point set."""
    pts = sorted(set(points))

    @functools.lru_cache(maxsize=None)
    def h(i):
        if i >= len(pts):
            return 0
        best = math.inf
        for s in range(pts[i] - ell, pts[i] + 1):
            j = i
            while j < len(pts) and pts[j] <= s + ell:
                j += 1
            best = min(best, 1 + h(j))
        return best

    return h(0)


def log_rho_integral_exact(mu: np.ndarray, T: float) -> float:
    """``int_1^T log rho(t) / t**2 dt`` from the product form, term by term:
    each factor contributes ``mu (1 - (1 + log(mu T)) / (mu T))``."""
    total = 0.0
    for m in mu:
        x = m * T
        if x > 1:
            total += m * (1.0 - (1.0 + math.log(x)) / x)
    return total


def sinc(x):
    return np.sinc(np.asarray(x) / np.pi)
