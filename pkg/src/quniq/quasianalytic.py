"""Bang degrees, Nazarov-Sodin-Volberg coefficients and Remez-type constants.

Everything is carried in log-space. The small parameter ``t`` of a Bang
degree is always passed as ``lam = -log t`` because it underflows after a
single level of the dimension recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ExceedsNmaxError, InvalidWeightError
from .weights import MomentSequence, PLSStatus, Weight, moment_sequence, pls_classify

LOG4 = math.log(4.0)
_NEST_THRESHOLD = 1e300


@dataclass(frozen=True)
class LogScale:
    """A positive quantity stored as its natural log.

    With ``nested`` set, ``value`` is the log of the log (for quantities
    whose log itself overflows). Products add logs.
    """

    value: float
    nested: bool = False

    @classmethod
    def of(cls, log_value: float) -> "LogScale":
        if log_value > _NEST_THRESHOLD:
            return cls(math.log(log_value), True)
        return cls(float(log_value))

    @property
    def log(self) -> float:
        if self.nested:
            return math.exp(self.value) if self.value < 709.0 else math.inf
        return self.value

    def _loglog(self) -> float:
        return self.value if self.nested else math.log(max(self.value, 1e-300))

    def __mul__(self, other: "LogScale") -> "LogScale":
        if not (self.nested or other.nested):
            return LogScale.of(self.value + other.value)
        return LogScale(float(np.logaddexp(self._loglog(), other._loglog())), True)

    def _key(self):
        return (1, self.value) if self.nested else (0, self.value)

    def __lt__(self, other: "LogScale") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "LogScale") -> bool:
        return self._key() <= other._key()

    def record(self) -> dict:
        return {"log_value": self.value, "nesting_flag": self.nested}


@dataclass(frozen=True)
class BangQuery:
    m: MomentSequence
    neg_log_t: float

    def __post_init__(self):
        if not self.neg_log_t >= 0:
            raise ValueError("neg_log_t must be nonnegative")


def bang_degree(m: MomentSequence | BangQuery, neg_log_t: float | None = None) -> int:
    """Largest ``N`` with ``sum_{lam < n <= N} mu_n < e`` (strict).

    Raises :class:`ExceedsNmaxError` when the partial sum stays below ``e``
    through ``n_max``; that is the expected outcome for sequences with
    ``sum mu_n < e`` tails (non-quasianalytic classes).
    """
    if isinstance(m, BangQuery):
        m, lam = m.m, m.neg_log_t
    else:
        lam = float(neg_log_t)
        BangQuery(m, lam)
    first = math.floor(lam) + 1
    if first > m.n_max:
        raise ExceedsNmaxError(
            f"Bang range starts at n={first} beyond n_max={m.n_max}", needed=first
        )
    partial = m.cum_mu[first:] - m.cum_mu[first - 1]
    # partial[j] is the sum over first..first+j
    hit = np.flatnonzero(partial >= math.e)
    if hit.size == 0:
        raise ExceedsNmaxError(
            f"sum of mu_n over ({lam:.6g}, {m.n_max}] is {partial[-1]:.6g} < e",
            needed=m.n_max + 1,
        )
    return first + int(hit[0]) - 1


def gamma_coeff(m: MomentSequence, n: int) -> float:
    """``max_{1<=j<=n} j (M_{j+1} M_{j-1} / M_j**2 - 1)``; zero for ``n = 0``."""
    if n <= 0:
        return 0.0
    if n + 1 > m.n_max:
        raise ExceedsNmaxError(f"gamma_M({n}) needs M_{n + 1}, n_max={m.n_max}", needed=n + 1)
    lm = m.log_m
    j = np.arange(1, n + 1)
    second = lm[j + 1] + lm[j - 1] - 2.0 * lm[j]
    return float(np.max(j * np.expm1(second)))


def big_gamma(m: MomentSequence, n: int) -> LogScale:
    """``Gamma_M(n) = 4 exp(4 + 4 gamma_M(n))`` as a log."""
    return LogScale.of(LOG4 + 4.0 + 4.0 * gamma_coeff(m, n))


def theta_1d(m: MomentSequence, neg_log_t: float, s: float) -> LogScale:
    """One-dimensional Remez constant ``(Gamma_M(2n) / s)**(2n)`` with ``n`` the Bang degree."""
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    n = bang_degree(m, neg_log_t)
    if n == 0:
        return LogScale(0.0)
    lg = big_gamma(m, 2 * n)
    return LogScale.of(2 * n * (lg.value - math.log(s)))


@dataclass(frozen=True)
class ThetaTrace:
    """Per-level record of a ``theta_nd`` evaluation."""

    log_theta: LogScale
    levels: list = field(default_factory=list)  # (level, lam, s, bang_degree, log_theta_1)


def theta_nd(m: MomentSequence, d: int, neg_log_t: float, s: float) -> LogScale:
    return theta_nd_trace(m, d, neg_log_t, s).log_theta


def theta_nd_trace(m: MomentSequence, d: int, neg_log_t: float, s: float) -> ThetaTrace:
    """``Theta(d, t, s) <= Theta(1, t, s/2) * Theta(d-1, t / Theta(1, t, s/2), s/2)``.

    Unrolled: level ``k < d`` uses ``s / 2**k`` and the last level keeps the
    parameter it is handed.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    levels = []
    total = 0.0
    lam = float(neg_log_t)
    cur_s = float(s)
    for level in range(1, d + 1):
        s_here = cur_s if level == d else cur_s / 2.0
        try:
            n = bang_degree(m, lam)
            th = theta_1d(m, lam, s_here)
        except ExceedsNmaxError as exc:
            raise ExceedsNmaxError(
                f"level {level} of {d}: {exc}", level=level, needed=exc.needed
            ) from None
        levels.append((level, lam, s_here, n, th.value))
        if d == 1:
            return ThetaTrace(th, levels)
        total += th.value
        lam = lam + th.value
        cur_s = s_here
    return ThetaTrace(LogScale.of(total), levels)


def sobolev_constant(d: int) -> float:
    """Crude ``C(d)`` with ``|g|_inf <= C(d) sum_{alpha in {0,1}^d} |D^alpha g|_2`` on a unit cube.

    Iterating ``|g(x)| <= |g|_{L2} + |g'|_{L2}`` on a unit interval over each
    coordinate gives ``2**d`` terms, each with constant one.
    """
    return float(2**d)


def bad_cube_base(d: int) -> float:
    """Smallest ``B > 2 pi`` with ``B**-2 sum_n (2 pi / B)**(2n) (n+1)**d <= 1/2``."""

    def excess(B: float) -> float:
        x = (2.0 * math.pi / B) ** 2
        n = np.arange(0, 20000)
        return float(np.sum(x**n * (n + 1.0) ** d)) / B**2 - 0.5

    lo, hi = 2.0 * math.pi * (1 + 1e-9), 2.0 * math.pi
    while excess(hi) > 0:
        hi *= 1.25
    return float(optimize.brentq(excess, max(lo, hi / 1.25), hi, xtol=1e-12))


def default_A(d: int) -> float:
    """Default class-shift factor ``A(d) = max(e, C(d) B(d))``."""
    return max(math.e, sobolev_constant(d) * bad_cube_base(d))


@dataclass(frozen=True)
class PLSConstant:
    log_C: LogScale
    A: float
    neg_log_t: float
    trace: ThetaTrace
    shifted: MomentSequence = field(repr=False)

    @property
    def bang_degrees(self) -> list[int]:
        return [lvl[3] for lvl in self.trace.levels]


def pls_constant_detail(w: Weight, d: int, C_W: float, gamma: float, A: float | None = None,
                        n_max: int = 4000, m: MomentSequence | None = None) -> PLSConstant:
    """Unit-side constant ``C`` with ``|f|_2 <= C |f|_{L2(E)}``.

    ``C**2 = (4/gamma) Theta_{M_A}(d, 1/(C_W A**(1+d) M_d), gamma/2)**2``,
    where ``M_A`` is the shifted class ``A**n M_{n+d} / M_d``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if C_W < 1:
        raise ValueError("C_W must be >= 1")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if pls_classify(w) is not PLSStatus.PLS_HOLDS:
        raise InvalidWeightError(f"{w!r} fails the PLS property; no finite constant exists")
    A = default_A(d) if A is None else float(A)
    if not A > 1:
        raise ValueError("A must exceed 1")
    if m is None:
        m = moment_sequence(w, n_max)
    mt = m.shifted(A, d)
    lam = math.log(C_W) + (1 + d) * math.log(A) + m.log_moment(d)
    trace = theta_nd_trace(mt, d, lam, gamma / 2.0)
    log_c = 0.5 * math.log(4.0 / gamma) + trace.log_theta.log
    return PLSConstant(LogScale.of(log_c), A, lam, trace, mt)


def pls_constant(w: Weight, d: int, C_W: float, gamma: float, A: float | None = None,
                 n_max: int = 4000) -> LogScale:
    return pls_constant_detail(w, d, C_W, gamma, A, n_max).log_C
