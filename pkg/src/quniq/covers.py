"""Interval sets, W-short covers, sparsity norms and the majorant weight.

A W-short cover of ``Q`` assigns to every scale ``n`` a family of intervals of
length ``Omega_n = log W(e**n)`` covering ``Q`` on the two annular bands
``[-e**(n+1), -e**n]`` and ``[e**n, e**(n+1)]``. Its norm is
``sum_n (Omega_n / e**n)**2 * card(J_n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._core import kernels
from .errors import DegenerateScaleError, HypothesisViolationError, NotACoverError
from .weights import Weight

_REL_TOL = 1e-12


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed intervals, sorted and merged on construction."""

    a: np.ndarray
    b: np.ndarray

    def __init__(self, intervals: Iterable[Sequence[float]] = ()):
        pairs = sorted((float(x), float(y)) for x, y in intervals)
        merged: list[list[float]] = []
        for x, y in pairs:
            if y < x:
                raise ValueError(f"interval [{x}, {y}] has negative length")
            if merged and x <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], y)
            else:
                merged.append([x, y])
        a = np.array([m[0] for m in merged], dtype=float)
        b = np.array([m[1] for m in merged], dtype=float)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def _from_sorted(cls, a: np.ndarray, b: np.ndarray) -> "IntervalSet":
        return cls(zip(a, b))

    def __len__(self) -> int:
        return len(self.a)

    def __iter__(self):
        return iter(zip(self.a.tolist(), self.b.tolist()))

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntervalSet) and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))

    @property
    def empty(self) -> bool:
        return len(self.a) == 0

    def measure(self) -> float:
        return float(np.sum(self.b - self.a))

    def translate(self, t: float) -> "IntervalSet":
        return IntervalSet(zip(self.a - t, self.b - t))

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        keep = (self.b >= lo) & (self.a <= hi)
        return IntervalSet(zip(np.maximum(self.a[keep], lo), np.minimum(self.b[keep], hi)))

    def measure_in(self, lo: float, hi: float) -> float:
        return self.clip(lo, hi).measure()

    def contains(self, x: float) -> bool:
        i = int(np.searchsorted(self.a, x, side="right")) - 1
        return i >= 0 and x <= self.b[i]

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(itertools.chain(iter(self), iter(other)))

    def endpoints(self) -> np.ndarray:
        return np.concatenate((self.a, self.b))

    def gap_endpoints(self) -> np.ndarray:
        """Endpoints bounding the gaps between consecutive intervals."""
        return np.concatenate((self.b[:-1], self.a[1:]))

    # text format: one "a b" pair per line, '#' starts a comment
    def to_text(self) -> str:
        return "".join(f"{x!r} {y!r}\n" for x, y in self)

    @classmethod
    def from_text(cls, text: str) -> "IntervalSet":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'a b', got {line!r}")
            try:
                pairs.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ValueError(f"line {lineno}: not a number in {line!r}") from None
        return cls(pairs)


def bands(n: int) -> tuple[tuple[float, float], tuple[float, float]]:
    lo, hi = math.exp(n), math.exp(n + 1)
    return (-hi, -lo), (lo, hi)


def omega_scale(w: Weight, n: int) -> float:
    """``Omega_n = log W(e**n)``, checked against ``log W(t) <= t/4``."""
    t = math.exp(n)
    om = w.log_weight(t)
    if not om > 0:
        raise DegenerateScaleError(f"Omega_{n} = {om}: zero-length cover intervals")
    if not om <= t / 4.0 * (1 + 1e-14):
        raise HypothesisViolationError(f"log W(e^{n}) = {om} exceeds e^{n}/4 = {t / 4}")
    return om


@dataclass
class CoverFamily:
    """Per-scale interval families for ``Q - shift``.

    ``starts[n]`` holds left endpoints; every interval at scale ``n`` has
    length ``omega[n]``.
    """

    starts: dict[int, np.ndarray]
    omega: dict[int, float]
    shift: float = 0.0
    n_range: tuple[int, ...] = ()
    regularized: bool = False

    def intervals(self, n: int) -> list[tuple[float, float]]:
        om = self.omega[n]
        return [(s, s + om) for s in self.starts.get(n, ())]

    def card(self, n: int) -> int:
        return len(self.starts.get(n, ()))

    @property
    def scales(self) -> list[int]:
        return sorted(n for n, s in self.starts.items() if len(s))

    def total_card(self) -> int:
        return sum(self.card(n) for n in self.starts)

    @property
    def norm(self) -> float:
        return float(sum((self.omega[n] / math.exp(n)) ** 2 * self.card(n) for n in self.scales))

    def record(self) -> dict:
        return {
            "shift": self.shift,
            "norm": self.norm,
            "regularized": self.regularized,
            "scales": [
                {"n": n, "omega": self.omega[n], "card": self.card(n),
                 "intervals": [list(iv) for iv in self.intervals(n)]}
                for n in self.scales
            ],
        }


def _band_tol(hi: float) -> float:
    return _REL_TOL * max(1.0, abs(hi))


def greedy_short_cover(q: IntervalSet, w: Weight, t: float, n_range: Iterable[int]) -> CoverFamily:
    """Minimal cover of ``(q - t)`` on each band, placed greedily from the left.

    Greedy placement starting each interval at the leftmost uncovered point is
    optimal for covering a subset of the line by intervals of a fixed length.
    ``Omega_n`` is only evaluated at scales whose bands meet the set.
    """
    shifted = q.translate(t)
    n_range = tuple(n_range)
    starts: dict[int, np.ndarray] = {}
    omega: dict[int, float] = {}
    for n in n_range:
        pieces = []
        for lo, hi in bands(n):
            part = shifted.clip(lo, hi)
            if part.empty:
                continue
            if n not in omega:
                omega[n] = omega_scale(w, n)
            pieces.append(kernels.greedy_starts(part.a, part.b, lo, hi, omega[n], _band_tol(hi)))
        if pieces:
            starts[n] = np.concatenate(pieces)
    return CoverFamily(starts, omega, float(t), n_range)


def covers_set(c: CoverFamily, q: IntervalSet) -> bool:
    """Whether every band piece of ``q - c.shift`` lies inside the scale's cover."""
    shifted = q.translate(c.shift)
    for n in c.n_range:
        for lo, hi in bands(n):
            part = shifted.clip(lo, hi)
            if part.empty:
                continue
            if n not in c.omega or c.card(n) == 0:
                return False
            cov = IntervalSet(c.intervals(n))
            tol = _band_tol(hi)
            for x, y in part:
                i = int(np.searchsorted(cov.a, x + tol, side="right")) - 1
                if i < 0 or cov.a[i] > x + tol or cov.b[i] < y - tol:
                    return False
    return True


def regularize_cover(c: CoverFamily, q: IntervalSet) -> CoverFamily:
    """Cover built on a maximal ``Omega_n/2``-separated subset of each band piece.

    Intervals of length ``Omega_n`` centred at the chosen points still cover,
    and their middle halves are pairwise disjoint.
    """
    if not covers_set(c, q):
        raise NotACoverError("input family does not cover the set on its bands")
    shifted = q.translate(c.shift)
    starts: dict[int, np.ndarray] = {}
    for n in c.scales:
        om = c.omega[n]
        pieces = []
        for lo, hi in bands(n):
            part = shifted.clip(lo, hi)
            if part.empty:
                continue
            pts = kernels.separated_points(part.a, part.b, lo, hi, om / 2.0)
            pieces.append(pts - om / 2.0)
        if pieces:
            starts[n] = np.concatenate(pieces)
    return CoverFamily(starts, dict(c.omega), c.shift, c.n_range, regularized=True)


@dataclass(frozen=True)
class SparsityEstimate:
    value: float
    status: str
    argmax: float | None
    samples: int


def critical_translates(q: IntervalSet, n_range: Iterable[int]) -> np.ndarray:
    """Shifts at which some band edge ``+-e**n`` meets an endpoint of ``q``."""
    ends = q.endpoints()
    edges = []
    for n in n_range:
        for e in (math.exp(n), math.exp(n + 1)):
            edges.extend((e, -e))
    if not len(ends):
        return np.zeros(0)
    return (ends[:, None] - np.asarray(edges)[None, :]).ravel()


def sparsity_norm_estimate(q: IntervalSet, w: Weight, translate_grid: Sequence[float],
                           n_range: Iterable[int], extra: str = "gaps") -> SparsityEstimate:
    """Sampled ``sup_t`` of the greedy cover norm of ``q - t``: a lower bound for ``|Q|_W``.

    ``extra`` adds informative shifts to the grid: ``"gaps"`` the endpoints of
    the gaps of ``q``, ``"critical"`` additionally every shift moving a band
    edge onto an endpoint, ``"none"`` nothing.
    """
    grid = np.asarray(list(translate_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("translate grid must be non-empty")
    n_range = tuple(n_range)
    if q.empty:
        return SparsityEstimate(0.0, "LOWER_BOUND", None, int(grid.size))
    samples = [grid]
    if extra in ("gaps", "critical"):
        samples.append(q.gap_endpoints())
    if extra == "critical":
        samples.append(critical_translates(q, n_range))
    ts = np.unique(np.concatenate(samples))
    best, arg = -1.0, None
    for t in ts:
        val = greedy_short_cover(q, w, float(t), n_range).norm
        if val > best:
            best, arg = val, float(t)
    return SparsityEstimate(best, "LOWER_BOUND", arg, int(ts.size))


def phi_regular_cover_count(q: IntervalSet, t: float, N: float, ell: float) -> int:
    """Minimal number of length-``ell`` intervals covering ``q ∩ [t-N, t+N]``."""
    if N < 1 or not 1 <= ell <= N:
        raise ValueError("need N >= 1 and 1 <= ell <= N")
    part = q.clip(t - N, t + N)
    if part.empty:
        return 0
    starts = kernels.greedy_starts(part.a, part.b, t - N, t + N, ell, _band_tol(abs(t) + N))
    return int(len(starts))


def bourdyat_norm_bound(phi: Callable[[float], float] | Mapping[int, float], n_max: int,
                        exponent: float | None = None) -> float:
    """``2 sum_{n=1}^{n_max} phi(8(n+1)) / n**2`` plus a tail bound.

    ``phi`` is a callable or a mapping ``n -> phi(8(n+1))``. When a growth
    exponent ``delta`` with ``phi(lam x) <= lam**delta phi(x)`` (``lam >= 1``)
    is declared, the tail past ``n_max`` is bounded by
    ``2 phi(8(n_max+1)) (2/(n_max+1))**delta n_max**(delta-1) / (1-delta)``,
    infinite for ``delta >= 1``.
    """
    if callable(phi):
        vals = {n: float(phi(8.0 * (n + 1))) for n in range(1, n_max + 1)}
    else:
        vals = {n: float(phi[n]) for n in range(1, n_max + 1)}
    seq = [vals[n] for n in range(1, n_max + 1)]
    if any(b < a - 1e-12 for a, b in zip(seq, seq[1:])):
        raise ValueError("phi samples must be nondecreasing")
    total = 2.0 * sum(v / n**2 for n, v in vals.items())
    if exponent is None:
        return total
    if exponent >= 1.0:
        return math.inf
    last = vals[n_max]
    tail = 2.0 * last * (2.0 / (n_max + 1)) ** exponent * n_max ** (exponent - 1.0) / (1.0 - exponent)
    return total + tail


def _eta(x: np.ndarray, center: float, om: float) -> np.ndarray:
    # 1 on 2J, 0 off 3J, linear in between (slope 2/om)
    r = np.abs(x - center)
    return np.clip((1.5 * om - r) / (0.5 * om), 0.0, 1.0)


def majorant_log_weight(c: CoverFamily, w: Weight, t, n0: int | None = None):
    """``log W~(t) = sqrt(max(1,|t|)) + sum_{n >= n0} sum_J Omega_{n+2} eta_J(t)``.

    ``n0`` defaults to :func:`majorant_cutoff`; scales below it, where
    ``W <= e**4``, contribute nothing. Pass ``n0=0`` to keep every scale.
    """
    if not c.regularized:
        raise ValueError("majorant needs a regularized cover")
    if n0 is None:
        n0 = majorant_cutoff(w)
    x = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.sqrt(np.maximum(1.0, np.abs(x)))
    for n in c.scales:
        if n < n0:
            continue
        om = c.omega[n]
        big = w.log_weight(math.exp(n + 2))
        centers = c.starts[n] + om / 2.0
        for ctr in centers:
            out = out + big * _eta(x, ctr, om)
    return out if np.ndim(t) else float(out[0])


def majorant_cutoff(w: Weight, n_limit: int = 200) -> int:
    """Smallest ``n`` with ``Omega_n >= 4``."""
    for n in range(n_limit + 1):
        if w.log_weight(math.exp(n)) >= 4.0:
            return n
    raise ValueError(f"Omega_n < 4 for all n <= {n_limit}")


def tripled(c: CoverFamily, n: int) -> list[tuple[float, float]]:
    om = c.omega[n]
    return [(s + om / 2.0 - 1.5 * om, s + om / 2.0 + 1.5 * om) for s in c.starts.get(n, ())]


def tripled_in_enlarged_band(c: CoverFamily) -> bool:
    """Every ``3J`` at scale ``n`` sits in ``[e**(n-1), e**(n+2)]`` or its mirror."""
    for n in c.scales:
        lo, hi = math.exp(n - 1), math.exp(n + 2)
        for x, y in tripled(c, n):
            if not ((lo <= x and y <= hi) or (-hi <= x and y <= -lo)):
                return False
    return True


def max_tripled_overlap(c: CoverFamily) -> int:
    """Largest number of tripled intervals met by a single tripled interval."""
    trip = [iv for n in c.scales for iv in tripled(c, n)]
    if not trip:
        return 0
    arr = np.array(trip)
    order = np.argsort(arr[:, 0])
    arr = arr[order]
    best = 0
    for x, y in arr:
        hits = int(np.count_nonzero((arr[:, 0] <= y) & (arr[:, 1] >= x)))
        best = max(best, hits)
    return best


def overlap_bound(c_doub: float) -> float:
    """Nine neighbouring scales, at most ``30 C_doub**8`` intervals each."""
    return 9.0 * 30.0 * c_doub**8


def downgrade_cover(c: CoverFamily, w_small: Weight) -> CoverFamily:
    """Re-cover every interval of length ``Omega_n`` by ``floor(Omega_n / Omega~_n) + 1``
    intervals of the smaller length ``Omega~_n = log W~(e**n)``."""
    starts: dict[int, np.ndarray] = {}
    omega: dict[int, float] = {}
    for n in c.scales:
        om = c.omega[n]
        small = omega_scale(w_small, n)
        if small > om * (1 + 1e-14):
            raise ValueError("downgrade needs W~ <= W")
        k = int(math.floor(om / small)) + 1
        # spread the k starts evenly so consecutive pieces overlap strictly;
        # abutting pieces could leave a one-ulp gap after rounding
        step = (om - small) / (k - 1) if k > 1 else 0.0
        offs = np.arange(k) * step
        starts[n] = (c.starts[n][:, None] + offs[None, :]).ravel()
        omega[n] = small
    return CoverFamily(starts, omega, c.shift, c.n_range)


def cantor_set(base: int, digits: Iterable[int], depth: int, scale: float = 1.0) -> IntervalSet:
    """Union of ``|D|**depth`` intervals of length ``scale * base**-depth`` in ``[0, scale]``."""
    digits = sorted(set(int(d) for d in digits))
    if base < 3 or not digits or digits[0] < 0 or digits[-1] >= base:
        raise ValueError("need base >= 3 and digits within 0..base-1")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    idx = np.zeros(1, dtype=np.int64)
    for _ in range(depth):
        idx = (idx[:, None] * base + np.asarray(digits)[None, :]).ravel()
    width = scale / base**depth
    left = idx.astype(float) * width
    return IntervalSet(zip(left, left + width))


def cantor_record(base: int, digits: Iterable[int], depth: int, scale: float) -> dict:
    return {"base": base, "digits": sorted(set(digits)), "depth": depth, "scale": scale}


@dataclass(frozen=True)
class GammaDenseFamily:
    gamma: float
    J: dict = field(hash=False)
    window: tuple[int, int]

    def union(self) -> IntervalSet:
        return IntervalSet(self.J.values())

    def is_valid(self) -> bool:
        for n, (x, y) in self.J.items():
            if y - x < self.gamma - 1e-12 or y < n or x > n + 1:
                return False
        return True

    def relative_density_min(self, ell: float = 3.0) -> float:
        """Least measure of ``E ∩ [x, x + ell]`` over windows inside the family's span."""
        E = self.union()
        lo, hi = self.window[0], self.window[1] + 1 - ell
        if hi < lo:
            raise ValueError("window shorter than ell")
        cand = np.concatenate((E.endpoints(), E.endpoints() - ell, [lo, hi]))
        cand = cand[(cand >= lo) & (cand <= hi)]
        return float(min(E.measure_in(x, x + ell) for x in np.unique(cand)))


def gamma_dense_intervals(gamma: float, window: tuple[int, int], rule: str = "LEFT",
                          seed: int | None = None) -> GammaDenseFamily:
    """One interval of length ``gamma`` meeting each ``[n, n+1]`` for ``n`` in the window."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    n_lo, n_hi = window
    rule = rule.upper()
    rng = np.random.default_rng(seed) if rule == "RANDOM" else None
    J = {}
    for n in range(n_lo, n_hi + 1):
        if rule == "LEFT":
            x = float(n)
        elif rule == "RANDOM":
            x = n + float(rng.uniform(0.0, 1.0 - gamma))
        else:
            raise ValueError(f"unknown placement rule {rule!r}")
        J[n] = (x, x + gamma)
    return GammaDenseFamily(gamma, J, (n_lo, n_hi))
