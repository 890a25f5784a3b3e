"""Admissible weights, their moment sequences and logarithmic integrals.

A weight is handled through ``log W``. Four families are supported:

* :class:`BandLimit` -- ``W = 1`` on ``[0, N]`` and ``+inf`` beyond.
* :class:`PowerExp` -- ``log W(t) = c t**alpha`` for ``t >= 1``, ``W = 1`` below.
* :class:`EndPoint` -- ``log W(t) = c t / log(e + t)**delta``.
* :class:`Tabulated` -- piecewise linear in ``(log t, log W)`` coordinates.

All moment-type quantities are exchanged as natural logarithms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from ._core import END_POINT, POWER_EXP, kernels
from .errors import (
    DivergentError,
    InvalidWeightError,
    NotLogConvexError,
    UndecidableError,
)

INF = math.inf

LOG_CONVEX_TOL = 1e-6
MOMENT_TOL = 1e-10


class PLSStatus(enum.Enum):
    PLS_HOLDS = "PLS_HOLDS"
    PLS_FAILS = "PLS_FAILS"


class IntegralForm(enum.Enum):
    CAUCHY = "CAUCHY"
    POWER = "POWER"


class Weight:
    """Base class; subclasses are frozen dataclasses."""

    family: str = ""

    @property
    def finiteness_radius(self) -> float:
        return INF

    def log_weight(self, t: float) -> float:
        raise NotImplementedError

    def phi(self, s: float) -> float:
        """``log W(e**s)`` for ``s >= 0`` (the branch used for moments)."""
        return self.log_weight(math.exp(s))

    def params(self) -> dict:
        raise NotImplementedError

    def declared_exponent(self):
        """Growth exponent ``a`` with ``log W(t) ~ t**a`` (``inf`` for a band)."""
        raise NotImplementedError

    # helpers for the normalized (log-log convex, ``W = 1`` on [0,1]) minorant
    def _tangent_point(self) -> float:
        return 0.0

    def normalized_log_weight(self, t: float) -> float:
        """Largest minorant of ``log W`` that vanishes on [0,1] and is convex in ``log t``.

        Its moments ``sup_t t**n / W(t)`` coincide with the enveloped moments
        ``max(M_n, M_{n-1})`` built by :func:`moment_sequence`.
        """
        if t <= 1.0:
            return 0.0
        s = math.log(t)
        st = self._tangent_point()
        if st <= 0.0 or s >= st:
            return self.log_weight(t)
        return s * self.phi(st) / st


@dataclass(frozen=True)
class BandLimit(Weight):
    N: float
    family = "band"

    def __post_init__(self):
        if not (self.N >= 1.0 and math.isfinite(self.N)):
            raise InvalidWeightError(f"band edge must be finite and >= 1, got {self.N}")

    @property
    def finiteness_radius(self) -> float:
        return float(self.N)

    def log_weight(self, t: float) -> float:
        return 0.0 if t <= self.N else INF

    def phi(self, s: float) -> float:
        return 0.0 if s <= math.log(self.N) else INF

    def params(self) -> dict:
        return {"N": self.N}

    def declared_exponent(self):
        return INF


@dataclass(frozen=True)
class PowerExp(Weight):
    c: float
    alpha: float
    family = "powerexp"

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidWeightError(f"c must be positive, got {self.c}")
        if not 0 < self.alpha <= 1:
            raise InvalidWeightError(f"alpha must lie in (0, 1], got {self.alpha}")

    def log_weight(self, t: float) -> float:
        if t < 1.0:
            return 0.0
        return self.c * t**self.alpha

    def phi(self, s: float) -> float:
        return self.c * math.exp(self.alpha * s)

    def params(self) -> dict:
        return {"c": self.c, "alpha": self.alpha}

    def declared_exponent(self):
        return self.alpha

    def _tangent_point(self) -> float:
        # argmin of c e^{alpha s} / s
        return 1.0 / self.alpha


@dataclass(frozen=True)
class EndPoint(Weight):
    delta: float
    c: float
    family = "endpoint"

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise InvalidWeightError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.c > 0:
            raise InvalidWeightError(f"c must be positive, got {self.c}")

    def log_weight(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        return self.c * t / math.log(math.e + t) ** self.delta

    def phi(self, s: float) -> float:
        return kernels.log_weight_exp(END_POINT, self.delta, self.c, s)

    def params(self) -> dict:
        return {"delta": self.delta, "c": self.c}

    def declared_exponent(self):
        return 1.0

    def _tangent_point(self) -> float:
        res = optimize.minimize_scalar(
            lambda s: self.phi(s) / s, bounds=(1e-9, 60.0), method="bounded",
            options={"xatol": 1e-12},
        )
        return float(res.x)


@dataclass(frozen=True)
class Tabulated(Weight):
    """Piecewise linear ``s -> log W(e**s)`` through ``knots``.

    The first knot must be ``(0, 0)``. ``slope`` continues the table past the
    last knot: a finite value gives a power-law tail, ``inf`` makes ``W``
    infinite beyond the last knot, and ``None`` reuses the last segment slope
    (evaluation works but PLS classification is then undecidable).
    """

    knots: tuple
    slope: float | None = None
    family = "tabulated"
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _ys: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.knots)
        object.__setattr__(self, "knots", pts)
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        if len(pts) == 0 or xs[0] != 0.0 or ys[0] != 0.0:
            raise InvalidWeightError("tabulated knots must start at (0, 0)")
        if np.any(np.diff(xs) <= 0):
            raise InvalidWeightError("knot abscissae must be strictly increasing")
        slopes = np.diff(ys) / np.diff(xs) if len(pts) > 1 else np.zeros(0)
        if np.any(slopes < -1e-12):
            raise InvalidWeightError("log W must be nondecreasing")
        if np.any(np.diff(slopes) < -1e-9):
            raise InvalidWeightError("knots are not convex in (log t, log W)")
        if self.slope is not None:
            last = slopes[-1] if len(slopes) else 0.0
            if self.slope < last - 1e-9:
                raise InvalidWeightError("extrapolation slope breaks convexity")
        elif len(pts) == 1:
            raise InvalidWeightError("a single knot needs a declared slope")
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ys", ys)

    @property
    def tail_slope(self) -> float:
        if self.slope is not None:
            return float(self.slope)
        xs, ys = self._xs, self._ys
        return float((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))

    @property
    def finiteness_radius(self) -> float:
        return math.exp(self._xs[-1]) if self.tail_slope == INF else INF

    def phi(self, s: float) -> float:
        xs, ys = self._xs, self._ys
        if s <= xs[-1]:
            return float(np.interp(s, xs, ys))
        k = self.tail_slope
        if k == INF:
            return INF
        return float(ys[-1] + k * (s - xs[-1]))

    def log_weight(self, t: float) -> float:
        if t <= 1.0:
            return 0.0
        return self.phi(math.log(t))

    def params(self) -> dict:
        return {"knots": [list(p) for p in self.knots], "slope": self.slope}

    def declared_exponent(self):
        if self.slope is None:
            return None
        return INF if self.slope == INF else 0.0


def eval_log_weight(w: Weight, t: float) -> float:
    """``log W(t)``; ``math.inf`` beyond the finiteness radius."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return w.log_weight(t)


def moment(w: Weight, n: int) -> float:
    """Raw ``log M_n = log sup_{t >= 1} t**n / W(t)``.

    ``M_0 = 1`` exactly. The supremum is found by golden-section search on the
    concave map ``s -> n s - log W(e**s)``; band limits and tables are exact.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0
    return float(_raw_log_moments(w, n)[n])


def _raw_log_moments(w: Weight, n_max: int) -> np.ndarray:
    if isinstance(w, BandLimit):
        return np.arange(n_max + 1) * math.log(w.N)
    if isinstance(w, PowerExp):
        vals, _ = kernels.moment_logs(POWER_EXP, w.c, w.alpha, n_max, MOMENT_TOL)
    elif isinstance(w, EndPoint):
        vals, _ = kernels.moment_logs(END_POINT, w.delta, w.c, n_max, MOMENT_TOL)
    elif isinstance(w, Tabulated):
        vals = _tabulated_moments(w, n_max)
    else:
        raise InvalidWeightError(f"unsupported weight {w!r}")
    vals = np.asarray(vals, dtype=float)
    bad = np.flatnonzero(~np.isfinite(vals[1:]))
    if bad.size:
        raise DivergentError(
            f"M_{bad[0] + 1} is infinite: {w!r} grows no faster than a power"
        )
    vals[0] = 0.0
    return vals


def _tabulated_moments(w: Tabulated, n_max: int) -> np.ndarray:
    # concave piecewise-linear objective: the sup sits at a knot or at infinity
    xs, ys = w._xs, w._ys
    k = w.tail_slope
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if k != INF and n > k:
            out[n] = math.inf
            continue
        out[n] = float(np.max(n * xs - ys))
    return out


@dataclass(frozen=True)
class MomentSequence:
    """Log-moments ``log M_n`` (n = 0..n_max) with ratios ``mu_n = M_{n-1}/M_n``.

    ``mu[0]`` is NaN so that ``mu[n]`` matches the usual indexing.
    """

    log_m: np.ndarray
    mu: np.ndarray
    source: object = "direct"
    raw_log_m: np.ndarray | None = None
    cum_mu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.log_m, self.mu):
            arr.setflags(write=False)
        cum = np.concatenate(([0.0], np.cumsum(self.mu[1:])))
        cum.setflags(write=False)
        object.__setattr__(self, "cum_mu", cum)

    @property
    def n_max(self) -> int:
        return len(self.log_m) - 1

    @classmethod
    def from_log_moments(cls, log_m: Sequence[float], source: object = "direct",
                         raw: Sequence[float] | None = None, check: bool = True):
        log_m = np.array(log_m, dtype=float)
        if log_m[0] != 0.0:
            raise InvalidWeightError("log M_0 must be 0")
        mu = np.empty_like(log_m)
        mu[0] = math.nan
        mu[1:] = np.exp(log_m[:-1] - log_m[1:])
        if check:
            check_log_convex(log_m)
        return cls(log_m, mu, source, None if raw is None else np.asarray(raw, dtype=float))

    @classmethod
    def from_mu(cls, mu: Sequence[float]):
        """Sequence with prescribed ratios ``mu[1:]`` (``mu[0]`` ignored)."""
        mu = np.asarray(mu, dtype=float)
        log_m = np.concatenate(([0.0], -np.cumsum(np.log(mu[1:]))))
        return cls.from_log_moments(log_m)

    def log_moment(self, n: int) -> float:
        return float(self.log_m[n])

    def mu_sum(self, start: int = 1, stop: int | None = None) -> float:
        """``sum_{start <= n <= stop} mu_n``."""
        stop = self.n_max if stop is None else min(stop, self.n_max)
        if stop < start:
            return 0.0
        return float(self.cum_mu[stop] - self.cum_mu[start - 1])

    def shifted(self, A: float, d: int) -> "MomentSequence":
        """``M~_n = A**n M_{n+d} / M_d`` (so ``M~_0 = 1``), kept in log form."""
        n = np.arange(self.n_max - d + 1)
        log_m = n * math.log(A) + self.log_m[d:] - self.log_m[d]
        log_m[0] = 0.0
        return MomentSequence.from_log_moments(log_m, source=("shifted", A, d))


def check_log_convex(log_m: np.ndarray, tol: float = LOG_CONVEX_TOL) -> None:
    if len(log_m) < 3:
        return
    second = log_m[2:] + log_m[:-2] - 2.0 * log_m[1:-1]
    scale = np.maximum(1.0, np.abs(log_m[1:-1]))
    bad = np.flatnonzero(second < -tol * scale)
    if bad.size:
        j = int(bad[0]) + 1
        raise NotLogConvexError(
            f"log-convexity fails at n={j}: second difference {second[j - 1]:.3e}"
        )


def moment_sequence(w: Weight, n_max: int) -> MomentSequence:
    """Moments up to ``n_max`` with the monotone envelope ``M_n <- max(M_n, M_{n-1})``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    raw = _raw_log_moments(w, n_max)
    env = np.maximum.accumulate(raw)
    return MomentSequence.from_log_moments(env, source=w, raw=raw)


@dataclass(frozen=True)
class OstrowskiValue:
    log_value: float
    truncated: bool
    partial: float
    n_terms: int


def ostrowski_rho(m: MomentSequence, r: float) -> OstrowskiValue:
    """``log rho(r) = sum_{n: r mu_n > 1} log(r mu_n)``.

    If ``r * mu[n_max] > 1`` the index set runs past the stored range: the
    value is ``inf`` and ``truncated`` is set, with the partial sum kept.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    terms = r * m.mu[1:]
    # mu is nonincreasing, so the qualifying indices are a prefix
    k = int(np.count_nonzero(terms > 1.0))
    partial = float(np.sum(np.log(terms[:k])))
    if k == m.n_max:
        return OstrowskiValue(INF, True, partial, k)
    return OstrowskiValue(partial, False, partial, k)


def _log_quad(f, a: float, b: float, points=()) -> tuple[float, float]:
    """``int_a^b f(t) dt`` computed in the variable ``s = log t``."""
    sa, sb = math.log(a), math.log(b)
    brk = sorted(math.log(p) for p in points if a < p < b)
    edges = [sa, *brk, sb]
    val = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), lo, hi,
                              limit=400, epsabs=1e-13, epsrel=1e-13)
        val += v
        err += e
    return val, err


def log_integral_detail(w: Weight, form: IntegralForm | str) -> tuple[float, float]:
    """Value and absolute error budget of the logarithmic integral.

    CAUCHY: ``int_0^inf log W(t) / (1 + t**2) dt``.
    POWER:  ``int_1^inf log W(t) / t**2 dt``.
    Divergence is decided from the family's declared growth, never by quadrature.
    """
    form = IntegralForm(form)
    if _log_integral_diverges(w):
        return INF, 0.0
    if form is IntegralForm.CAUCHY:
        kernel = lambda t: 1.0 / (1.0 + t * t)  # noqa: E731
    else:
        kernel = lambda t: 1.0 / (t * t)  # noqa: E731
    T = 1.0e4
    points: list[float] = []
    if isinstance(w, Tabulated):
        points = [math.exp(x) for x in w._xs[1:]]
        T = max(T, 10.0 * math.exp(w._xs[-1]))
    head, err = _log_quad(lambda t: w.log_weight(t) * kernel(t), 1.0, T, points)
    if form is IntegralForm.CAUCHY:
        # [0, 1]: only EndPoint is nonzero there
        if isinstance(w, EndPoint):
            v, e = integrate.quad(lambda t: w.log_weight(t) * kernel(t), 0.0, 1.0,
                                  epsabs=1e-13, epsrel=1e-13)
            head += v
            err += e
    tail, tail_err = _tail(w, T, form)
    return head + tail, err + tail_err


def _tail(w: Weight, T: float, form: IntegralForm) -> tuple[float, float]:
    # exact tail of the 1/t^2 form; the Cauchy kernel differs by O(T^-3)
    if isinstance(w, PowerExp):
        a = w.alpha
        upper = w.c * T ** (a - 1.0) / (1.0 - a)
        if form is IntegralForm.POWER:
            return upper, 0.0
        gap = w.c * T ** (a - 3.0) / (3.0 - a)
        return upper - 0.5 * gap, 0.5 * gap
    if isinstance(w, Tabulated):
        k = w.tail_slope
        a0 = w._ys[-1] - k * w._xs[-1]
        upper = (a0 + k * math.log(T) + k) / T
        if form is IntegralForm.POWER:
            return upper, 0.0
        gap = (abs(a0) + k * math.log(T) + k) / (3.0 * T**3)
        return upper - 0.5 * gap, 0.5 * gap
    raise UndecidableError(f"no tail model for {w!r}")


def _log_integral_diverges(w: Weight) -> bool:
    return pls_classify(w) is PLSStatus.PLS_HOLDS


def log_integral(w: Weight, form: IntegralForm | str = IntegralForm.CAUCHY) -> float:
    return log_integral_detail(w, form)[0]


def pls_classify(w: Weight) -> PLSStatus:
    """PLS holds iff the Cauchy log-integral diverges (decided from declared asymptotics)."""
    if isinstance(w, BandLimit):
        return PLSStatus.PLS_HOLDS
    if isinstance(w, PowerExp):
        return PLSStatus.PLS_HOLDS if w.alpha >= 1.0 else PLSStatus.PLS_FAILS
    if isinstance(w, EndPoint):
        # int dt / (t log^delta t) diverges exactly when delta <= 1
        return PLSStatus.PLS_HOLDS
    if isinstance(w, Tabulated):
        if w.slope is None:
            raise UndecidableError("tabulated weight without a declared extrapolation slope")
        return PLSStatus.PLS_HOLDS if w.slope == INF else PLSStatus.PLS_FAILS
    raise UndecidableError(f"unknown weight {w!r}")


def doubling_constant(w: Weight, t_max: float = 1e6, samples: int = 2000) -> float:
    """Sampled ``sup_{1 < t} log W(e t) / log W(t)`` over ``(1, t_max]``."""
    ts = np.geomspace(1.0 + 1e-9, t_max, samples)
    ratios = [w.log_weight(math.e * t) / w.log_weight(t) for t in ts]
    return float(max(ratios))


def log_lipschitz(w: Weight, t_max: float = 1e6, samples: int = 4000) -> float:
    """Sampled Lipschitz constant of ``log W`` on ``[1, t_max]``."""
    ts = np.geomspace(1.0, t_max, samples)
    vals = np.array([w.log_weight(t) for t in ts])
    return float(np.max(np.diff(vals) / np.diff(ts)))


# --- serialization -------------------------------------------------------

FAMILIES = ("band", "powerexp", "endpoint", "tabulated")


def weight_to_record(w: Weight, n_max: int | None = None) -> dict:
    exp = w.declared_exponent()
    return {
        "family": w.family,
        "params": w.params(),
        "n_max": n_max,
        "asymptotic_exponent": exp if exp is None or math.isfinite(exp) else "inf",
    }


def weight_from_record(rec: dict) -> Weight:
    fam = rec.get("family")
    p = dict(rec.get("params", {}))
    try:
        if fam == "band":
            return BandLimit(float(p["N"]))
        if fam == "powerexp":
            return PowerExp(float(p["c"]), float(p["alpha"]))
        if fam == "endpoint":
            return EndPoint(float(p["delta"]), float(p["c"]))
        if fam == "tabulated":
            slope = p.get("slope")
            if slope is not None:
                slope = float(slope)
            return Tabulated(tuple(tuple(k) for k in p["knots"]), slope)
    except KeyError as exc:
        raise InvalidWeightError(f"missing parameter {exc} for family {fam!r}") from None
    raise InvalidWeightError(f"unknown weight family {fam!r}")


_POSITIONAL = {"band": ["N"], "powerexp": ["c", "alpha"], "endpoint": ["delta", "c"]}


def parse_weight(text: str) -> Weight:
    """Parse ``FAMILY:params``.

    Examples: ``band:2``, ``powerexp:c=1,alpha=0.5``, ``endpoint:1,1``,
    ``tabulated:knots=0/0;1/1;2/3,slope=inf``.
    """
    fam, _, rest = text.strip().partition(":")
    fam = fam.strip().lower()
    if fam not in FAMILIES:
        raise InvalidWeightError(f"unknown weight family {fam!r}")
    params: dict = {}
    items = [x for x in rest.split(",") if x.strip()] if rest else []
    for i, item in enumerate(items):
        key, eq, val = item.partition("=")
        if not eq:
            names = _POSITIONAL.get(fam, [])
            if i >= len(names):
                raise InvalidWeightError(f"too many positional parameters in {text!r}")
            key, val = names[i], item
        key = key.strip()
        val = val.strip()
        if key == "knots":
            try:
                params["knots"] = [tuple(float(v) for v in kn.split("/")) for kn in val.split(";")]
            except ValueError:
                raise InvalidWeightError(f"bad knot list {val!r}") from None
        elif key == "slope":
            params["slope"] = None if val.lower() == "none" else float(val)
        else:
            try:
                params[key] = float(val)
            except ValueError:
                raise InvalidWeightError(f"bad number {val!r} for {key}") from None
    return weight_from_record({"family": fam, "params": params})
