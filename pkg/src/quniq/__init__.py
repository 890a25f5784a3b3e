"""Numerical toolkit for uniqueness and recovery inequalities under Fourier decay.

Submodules:

* ``weights``: weight families, moment sequences, log-integrals, PLS classification
* ``quasianalytic``: Bang degrees and dimension-recursive Remez constants
* ``covers``: interval sets, W-short covers, sparsity norms, Cantor sets
* ``verify``: discrete observability constants and the sinc-product construction
* ``cli``: the ``quniq`` command
"""

from __future__ import annotations

from ._core import BACKEND
from .covers import (
    CoverFamily,
    IntervalSet,
    bourdyat_norm_bound,
    cantor_set,
    gamma_dense_intervals,
    greedy_short_cover,
    majorant_log_weight,
    omega_scale,
    phi_regular_cover_count,
    regularize_cover,
    sparsity_norm_estimate,
)
from .errors import (
    DegenerateScaleError,
    DivergentError,
    ExceedsNmaxError,
    HypothesisViolationError,
    InvalidWeightError,
    NotACoverError,
    NotLogConvexError,
    QuniqError,
    TailTooFatError,
    UndecidableError,
    ZeroFunctionError,
)
from .quasianalytic import (
    LogScale,
    bang_degree,
    gamma_coeff,
    pls_constant,
    pls_constant_detail,
    theta_1d,
    theta_nd,
)
from .verify import (
    DiscreteExperiment,
    SpectralProfile,
    observability_constant,
    paley_wiener_profile,
    plancherel_derivative_check,
    recovery_ratio,
    synth_from_profile,
    weighted_energy,
)
from .weights import (
    BandLimit,
    EndPoint,
    IntegralForm,
    MomentSequence,
    PLSStatus,
    PowerExp,
    Tabulated,
    log_integral,
    moment,
    moment_sequence,
    ostrowski_rho,
    parse_weight,
    pls_classify,
)

__version__ = "0.1.0"
