"""Discrete numerical checks of recovery inequalities.

The discrete model is the unit circle: frequencies ``0..N-1``, spatial
samples ``x = j/N`` and the unitary transform
``f(x_j) = N**-1/2 sum_k c_k exp(2 pi i j k / N)``. Signed frequencies
(``k`` and ``k - N``) are used wherever a weight is evaluated at ``|xi|``.

The Paley-Wiener construction lives on the real line with the angular
convention ``f(x) = (2 pi)**-1 ∫ f^(xi) e^{i x xi} d xi``, so a factor
``sin(a xi)/(a xi)`` is the transform of ``(2a)**-1`` times the indicator of
``[-a, a]``.
"""

from __future__ import annotations

import enum
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._core import kernels
from .covers import cantor_set, gamma_dense_intervals
from .errors import TailTooFatError, ZeroFunctionError
from .weights import MomentSequence, Weight

SINGULAR_THRESHOLD = 1e-14
FULL_SVD_LIMIT = 8192


class Method(str, enum.Enum):
    FULL_SVD = "FULL_SVD"
    ITERATIVE = "ITERATIVE"


# --------------------------------------------------------------------------
# masks


def _as_mask(mask, N: int) -> np.ndarray:
    m = np.asarray(mask, dtype=bool).ravel()
    if m.size != N:
        raise ValueError(f"mask has length {m.size}, expected {N}")
    if not m.any():
        raise ValueError("mask must be non-empty")
    return m


def mask_hash(mask) -> str:
    return hashlib.sha1(np.packbits(np.asarray(mask, dtype=bool)).tobytes()).hexdigest()[:12]


def signed_frequencies(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


def cantor_freq_mask(N: int, base: int = 3, digits=(0, 2)) -> np.ndarray:
    """Frequencies ``0..N-1`` whose base-``base`` digits all lie in ``digits``."""
    k = round(math.log(N, base))
    if base**k != N:
        raise ValueError(f"N={N} is not a power of {base}")
    cs = cantor_set(base, digits, k, float(N))
    mask = np.zeros(N, dtype=bool)
    mask[np.rint(cs.a).astype(int)] = True
    return mask


def gamma_dense_space_mask(N: int, gamma: float, cells: int | None = None, rule: str = "LEFT",
                           seed: int | None = None) -> np.ndarray:
    """Sample points split into ``cells`` equal blocks, each holding one run of
    ``ceil(gamma * block)`` consecutive selected points.

    This is the discrete image of a gamma-dense interval family: block ``i``
    plays the unit interval ``[i, i+1]``. The default uses blocks of 9 points
    when ``N`` is divisible by 9, otherwise blocks of one point fewer than
    ``N`` allows evenly.
    """
    if cells is None:
        cells = N // 9 if N % 9 == 0 else max(1, N // 8)
    if cells < 1 or N % cells:
        raise ValueError(f"cells={cells} must divide N={N}")
    block = N // cells
    run = min(block, math.ceil(gamma * block - 1e-12))
    fam = gamma_dense_intervals(gamma, (0, cells - 1), rule, seed)
    mask = np.zeros(N, dtype=bool)
    for i, (x, _) in fam.J.items():
        off = int(math.floor((x - i) * block))
        off = min(off, block - run)
        mask[i * block + off: i * block + off + run] = True
    return mask


# --------------------------------------------------------------------------
# observability


@dataclass(frozen=True)
class ObservabilityResult:
    sigma_min: float
    recovery_constant: float
    method: str
    singular: bool
    residual: float | None = None
    iterations: int | None = None


@dataclass
class DiscreteExperiment:
    N: int
    freq_mask: np.ndarray = field(repr=False)
    space_mask: np.ndarray = field(repr=False)
    seed: int
    result: ObservabilityResult
    wall_time_ms: float = 0.0

    @property
    def key(self) -> tuple:
        return (self.N, mask_hash(self.freq_mask), mask_hash(self.space_mask), self.seed)

    def record(self, timing: bool = True) -> dict:
        rec = {
            "N": self.N,
            "Q": int(self.freq_mask.sum()),
            "E": int(self.space_mask.sum()),
            "sigma_min": self.result.sigma_min,
            "recovery_constant": self.result.recovery_constant,
            "method": self.result.method,
            "seed": self.seed,
            "status": "SINGULAR" if self.result.singular else "OK",
        }
        if timing:
            rec["wall_time_ms"] = self.wall_time_ms
        return rec


def restriction_matrix(N: int, freq_mask, space_mask) -> np.ndarray:
    """``|E| x |Q|`` block of the unitary inverse DFT."""
    q = np.flatnonzero(freq_mask)
    x = np.flatnonzero(space_mask)
    phase = np.outer(x, q) % N
    return np.exp(2j * np.pi * phase / N) / math.sqrt(N)


def gram_matrix(N: int, freq_mask, space_mask) -> np.ndarray:
    """``G = A^H A`` with ``G[k, k'] = N**-1 sum_{x in E} e^{2 pi i (k'-k) x / N}``."""
    q = np.flatnonzero(freq_mask)
    h = np.fft.ifft(np.asarray(space_mask, dtype=float))
    return h[(q[None, :] - q[:, None]) % N]


def _full_svd(N, fm, sm) -> float:
    if fm.sum() > sm.sum():
        return 0.0
    s = np.linalg.svd(restriction_matrix(N, fm, sm), compute_uv=False)
    return float(s[-1])


def _inverse_iteration(G: np.ndarray, rng: np.random.Generator, restarts: int = 3,
                       rtol: float = 1e-8, max_iter: int = 2000):
    """Smallest eigenvalue of a Hermitian PSD matrix by shifted-free inverse iteration.

    Each restart begins from a random vector; the run stops when the Rayleigh
    quotient settles to ``rtol`` relative and the residual
    ``|G v - lam v|`` is within ``rtol * |G|`` (which certifies that some
    eigenvalue lies within that distance of ``lam``). The smallest certified
    estimate over the restarts is returned.
    """
    n = G.shape[0]
    gnorm = float(np.linalg.norm(G, 2)) if n <= 64 else float(np.abs(G).sum(axis=1).max())
    try:
        lu = linalg.lu_factor(G, check_finite=False)
    except (linalg.LinAlgError, ValueError):
        return 0.0, 0.0, 0
    best, best_res, total_it = math.inf, math.inf, 0
    for _ in range(restarts):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        lam_old = math.inf
        for it in range(1, max_iter + 1):
            y = linalg.lu_solve(lu, v, check_finite=False)
            ny = np.linalg.norm(y)
            if not np.isfinite(ny) or ny == 0:
                return 0.0, 0.0, total_it + it
            v = y / ny
            gv = G @ v
            lam = float(np.real(np.vdot(v, gv)))
            res = float(np.linalg.norm(gv - lam * v))
            if abs(lam - lam_old) <= rtol * 1e-2 * max(abs(lam), 1e-300) and res <= rtol * gnorm:
                break
            lam_old = lam
        total_it += it
        if lam < best:
            best, best_res = lam, res
    return max(best, 0.0), best_res, total_it


def observability_constant(N: int, freq_mask, space_mask, method: str | Method = Method.FULL_SVD,
                           seed: int = 0) -> DiscreteExperiment:
    """Smallest singular value of restriction-to-``E`` composed with synthesis from ``Q``."""
    fm = _as_mask(freq_mask, N)
    sm = _as_mask(space_mask, N)
    method = Method(method)
    t0 = time.perf_counter()
    residual = iterations = None
    if method is Method.FULL_SVD:
        if N > FULL_SVD_LIMIT:
            raise ValueError(f"FULL_SVD supports N <= {FULL_SVD_LIMIT}")
        sigma = _full_svd(N, fm, sm)
    else:
        if fm.sum() > sm.sum():
            sigma = 0.0
        else:
            G = gram_matrix(N, fm, sm)
            lam, residual, iterations = _inverse_iteration(G, np.random.default_rng(seed))
            sigma = math.sqrt(lam)
    sigma = min(max(sigma, 0.0), 1.0)
    singular = sigma < SINGULAR_THRESHOLD
    rc = math.inf if singular else 1.0 / sigma
    res = ObservabilityResult(sigma, rc, method.value, singular, residual, iterations)
    wall = (time.perf_counter() - t0) * 1e3
    return DiscreteExperiment(N, fm, sm, int(seed), res, wall)


# --------------------------------------------------------------------------
# synthetic functions


@dataclass(frozen=True)
class SpectralProfile:
    """``MASK``: Gaussian coefficients on ``freq_mask``. ``DECAY``: coefficients
    obeying ``sum |c W|**2 <= C_W**2 sum |c|**2``."""

    mode: str
    freq_mask: np.ndarray | None = None
    weight: Weight | None = None
    C_W: float = 1.0

    def __post_init__(self):
        mode = self.mode.upper()
        object.__setattr__(self, "mode", mode)
        if mode == "MASK" and self.freq_mask is None:
            raise ValueError("MASK profile needs freq_mask")
        if mode == "DECAY" and self.weight is None:
            raise ValueError("DECAY profile needs a weight")
        if mode not in ("MASK", "DECAY"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.C_W < 1:
            raise ValueError("C_W must be >= 1")


def _gauss(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)


def log_weight_on_grid(w: Weight, N: int) -> np.ndarray:
    return np.array([w.log_weight(abs(k)) for k in signed_frequencies(N)])


def weighted_ratio(coeffs, log_w) -> float:
    """``sum |c W|**2 / sum |c|**2`` with ``W = exp(log_w)``; infinite mass gives inf."""
    c2 = np.abs(coeffs) ** 2
    live = c2 > 0
    if np.any(~np.isfinite(log_w[live])):
        return math.inf
    return float(np.sum(c2[live] * np.exp(2 * log_w[live])) / np.sum(c2))


def decay_coefficients(w: Weight, C_W: float, N: int, seed: int) -> np.ndarray:
    """Unit-norm coefficients whose weighted ratio sits within 1% below ``C_W**2``
    whenever the finite part of the spectrum allows it.

    A flat component on the frequencies of least weight is blended with a
    ``1/W``-shaped component on the rest; the blend parameter is bisected.
    """
    rng = np.random.default_rng(seed)
    lw = log_weight_on_grid(w, N)
    finite = np.isfinite(lw)
    if not finite.any():
        raise ValueError("weight is infinite at every grid frequency")
    floor = lw[finite].min()
    low = finite & (lw <= floor + 1e-12)
    high = finite & ~low
    a = np.zeros(N, complex)
    a[low] = _gauss(rng, int(low.sum()))
    a /= np.linalg.norm(a)
    if not high.any():
        return a
    b = np.zeros(N, complex)
    b[high] = _gauss(rng, int(high.sum())) * np.exp(-(lw[high] - lw[high].min()))
    b /= np.linalg.norm(b)
    target = C_W**2

    def blend(theta):
        c = math.cos(theta) * a + math.sin(theta) * b
        return c / np.linalg.norm(c)

    if weighted_ratio(a, lw) > target:
        return a
    if weighted_ratio(b, lw) <= target:
        return b
    lo, hi = 0.0, math.pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = weighted_ratio(blend(mid), lw)
        if r <= target:
            lo = mid
            if r >= 0.995 * target:
                break
        else:
            hi = mid
    return blend(lo)


def synth_coefficients(p: SpectralProfile, N: int, seed: int) -> np.ndarray:
    if p.mode == "MASK":
        fm = _as_mask(p.freq_mask, N)
        rng = np.random.default_rng(seed)
        c = np.zeros(N, complex)
        c[fm] = _gauss(rng, int(fm.sum()))
        return c
    return decay_coefficients(p.weight, p.C_W, N, seed)


def synth_from_profile(p: SpectralProfile, N: int, seed: int) -> np.ndarray:
    """Samples of a random function with the profile's spectrum (deterministic per seed)."""
    return np.fft.ifft(synth_coefficients(p, N, seed), norm="ortho")


def recovery_ratio(samples, space_mask) -> float:
    """``|f chi_E|_2 / |f|_2``."""
    f = np.asarray(samples)
    total = float(np.linalg.norm(f))
    if total == 0.0:
        raise ZeroFunctionError("recovery ratio of the zero function")
    m = np.asarray(space_mask, dtype=bool)
    return min(1.0, float(np.linalg.norm(f[m])) / total)


# --------------------------------------------------------------------------
# Paley-Wiener construction


@dataclass(frozen=True)
class PaleyWienerProfile:
    """Values of ``f^`` on a grid with the bookkeeping of the truncated product.

    ``support_halfwidth`` is ``2 eps + sum_{n0 <= n <= n_max} mu_n``: the
    inverse transform of the truncated product vanishes outside
    ``[-support_halfwidth, support_halfwidth]``.
    """

    xi: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    epsilon: float
    n0: int
    n_max: int
    tail_sum: float
    support_halfwidth: float
    log_scale: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def choose_n0(m: MomentSequence, epsilon: float, minimum: int = 10) -> int:
    """Smallest ``n0 >= minimum`` with ``sum_{n0 <= n <= n_max} mu_n < epsilon``."""
    tails = m.cum_mu[-1] - m.cum_mu[:-1]  # tails[n] = sum over n..n_max
    ok = np.flatnonzero(tails[minimum:] < epsilon)
    if ok.size == 0:
        raise TailTooFatError(f"no n0 in [{minimum}, {m.n_max}] has mu-tail below {epsilon}")
    return minimum + int(ok[0])


def paley_wiener_profile(m: MomentSequence, epsilon: float, n0: int | None, xi_grid) -> PaleyWienerProfile:
    """``f^(xi) = M_{n0-1} sinc(eps xi / n0)**(2 n0) prod_{n0 <= n <= n_max} sinc(mu_n xi)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if n0 is None:
        n0 = choose_n0(m, epsilon)
    if not 1 <= n0 <= m.n_max:
        raise ValueError(f"n0={n0} outside 1..{m.n_max}")
    tail = float(m.cum_mu[-1] - m.cum_mu[n0 - 1])
    if not tail < epsilon:
        raise TailTooFatError(f"sum_{{n >= {n0}}} mu_n = {tail:.6g} is not below eps = {epsilon}")
    xi = np.asarray(xi_grid, dtype=float)
    widths = np.concatenate((np.full(2 * n0, epsilon / n0), m.mu[n0:]))
    log_scale = float(m.log_m[n0 - 1])
    vals = np.exp(log_scale) * kernels.sinc_product(xi, widths)
    return PaleyWienerProfile(xi, vals, float(epsilon), int(n0), m.n_max, tail,
                              2.0 * epsilon + tail, log_scale)


def symmetric_grid(N: int, xi_max: float) -> np.ndarray:
    """``N`` frequencies ``k * dxi`` for ``k = -N/2 .. N/2 - 1`` with ``dxi = 2 xi_max / N``."""
    return (np.arange(N) - N // 2) * (2.0 * xi_max / N)


def inverse_transform(values, xi: np.ndarray):
    """Samples of ``f(x) = (2 pi)**-1 ∫ f^(xi) e^{i x xi} d xi`` on the dual grid.

    Returns ``(x, f)`` with ``x = j * 2 pi / (N dxi)``, ``j = -N/2 .. N/2 - 1``.
    """
    N = xi.size
    dxi = xi[1] - xi[0]
    centred = np.fft.ifftshift(np.asarray(values, dtype=complex))
    f = np.fft.fftshift(np.fft.ifft(centred)) * N * dxi / (2 * np.pi)
    x = (np.arange(N) - N // 2) * (2 * np.pi / (N * dxi))
    return x, f


def energy_outside(x: np.ndarray, f: np.ndarray, halfwidth: float) -> float:
    """Fraction of ``sum |f|**2`` carried by samples with ``|x| > halfwidth``."""
    e = np.abs(f) ** 2
    total = float(e.sum())
    if total == 0:
        raise ZeroFunctionError("zero function")
    return float(e[np.abs(x) > halfwidth].sum()) / total


@dataclass(frozen=True)
class WeightedEnergy:
    value: float
    tail_bound: float | None = None
    tail_valid_to: float | None = None


def weighted_energy(f_hat, w: Weight, xi_grid) -> float:
    """Trapezoid quadrature of ``|f^(xi)|**2 W(|xi|)**2`` over the grid.

    Products are formed in log space so that huge weights against tiny
    transform values do not overflow. Grid points where ``W`` is infinite
    contribute nothing when ``f^`` vanishes there and make the energy
    infinite otherwise.
    """
    return weighted_energy_detail(f_hat, w, xi_grid).value


def weighted_energy_detail(f_hat, w: Weight, xi_grid, profile: PaleyWienerProfile | None = None,
                           m: MomentSequence | None = None) -> WeightedEnergy:
    xi = np.asarray(xi_grid, dtype=float)
    fh = np.abs(np.asarray(f_hat, dtype=complex))
    lw = np.array([w.log_weight(abs(x)) for x in xi])
    with np.errstate(divide="ignore"):
        lf = np.log(fh)
    zero = fh == 0
    if np.any(~np.isfinite(lw) & ~zero):
        return WeightedEnergy(math.inf)
    integrand = np.where(zero, 0.0, np.exp(np.clip(2 * (lf + np.where(zero, 0.0, lw)), -745, 709)))
    value = float(np.trapezoid(integrand, xi)) if hasattr(np, "trapezoid") else float(np.trapz(integrand, xi))
    if profile is None or m is None:
        return WeightedEnergy(value)
    bound, valid_to = paley_wiener_tail_bound(profile, m, float(np.max(np.abs(xi))))
    return WeightedEnergy(value, bound, valid_to)


def paley_wiener_tail_bound(profile: PaleyWienerProfile, m: MomentSequence, xi_max: float):
    """Bound on ``∫_{|xi| > xi_max} |f^ W|**2`` for the normalized weight of ``m``.

    For ``xi`` whose Ostrowski maximizer ``n`` satisfies ``n0 - 1 <= n <= n_max``
    the sinc estimates give ``|f^(xi)| xi**n / M_n <= (n0/eps)**(2 n0) xi**(-n0-1)``,
    and ``W(xi) <= xi rho(xi)``, so ``|f^ W| <= K xi**(-n0)``. Returns the
    integrated bound over ``xi_max < |xi| < xi_valid`` and ``xi_valid``, the
    frequency at which the maximizer leaves the stored range.
    """
    n0, eps = profile.n0, profile.epsilon
    log_k = 2 * n0 * math.log(n0 / eps)
    # maximizer of r**n / M_n moves past n_max once r > 1 / mu_{n_max}
    xi_valid = 1.0 / m.mu[m.n_max]
    if xi_max >= xi_valid:
        return math.inf, xi_valid
    p = 2 * n0 - 1
    log_int = 2 * log_k - p * math.log(xi_max) - math.log(p)
    upper = 2 * log_k - p * math.log(xi_valid) - math.log(p)
    val = 2.0 * (math.exp(min(log_int, 709.0)) - math.exp(min(upper, 709.0)))
    return val, xi_valid


# --------------------------------------------------------------------------
# derivatives


@dataclass(frozen=True)
class PlancherelCheck:
    passed: bool
    ratio: float
    spatial_norm: float
    spectral_norm: float
    rel_error: float


def plancherel_derivative_check(samples, order: int, tol: float = 1e-10) -> PlancherelCheck:
    """Compare ``|D**n f|_2`` from spectral differentiation in space against
    ``(2 pi)**n |xi**n f^|_2`` on the unit-period grid.

    ``ratio`` is ``|D**n f|_2 / |f|_2``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    f = np.asarray(samples, dtype=complex)
    N = f.size
    k = signed_frequencies(N)
    c = np.fft.fft(f, norm="ortho")
    deriv = np.fft.ifft((2j * np.pi * k) ** order * c, norm="ortho")
    spatial = float(np.linalg.norm(deriv))
    spectral = (2 * np.pi) ** order * float(np.linalg.norm(k**order * c))
    base = float(np.linalg.norm(f))
    if base == 0:
        raise ZeroFunctionError("zero function")
    rel = abs(spatial - spectral) / max(spectral, 1e-300) if spectral > 0 else spatial
    return PlancherelCheck(rel <= tol, spatial / base, spatial, spectral, rel)
