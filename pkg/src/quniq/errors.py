"""Exception types shared across the package.

Each class carries a short ``code`` string so the CLI can map failures to
exit codes and reports without inspecting messages.
"""

from __future__ import annotations


class QuniqError(Exception):
    code = "ERROR"


class DivergentError(QuniqError):
    """The moment supremum is infinite (weight grows at most polynomially)."""

    code = "DIVERGENT"


class NotLogConvexError(QuniqError):
    code = "NOT_LOG_CONVEX"


class UndecidableError(QuniqError):
    code = "UNDECIDABLE"


class InvalidWeightError(QuniqError):
    code = "INVALID_WEIGHT"


class ExceedsNmaxError(QuniqError):
    """A Bang-degree partial sum never reached ``e`` inside the stored range.

    ``level`` is the recursion level (1-based) of a multi-dimensional
    Remez constant at which the overflow happened, when known.
    """

    code = "EXCEEDS_NMAX"

    def __init__(self, message: str, level: int | None = None, needed: int | None = None):
        super().__init__(message)
        self.level = level
        self.needed = needed


class DegenerateScaleError(QuniqError):
    code = "DEGENERATE_SCALE"


class HypothesisViolationError(QuniqError):
    code = "HYPOTHESIS_VIOLATION"


class NotACoverError(QuniqError):
    code = "NOT_A_COVER"


class TailTooFatError(QuniqError):
    code = "TAIL_TOO_FAT"


class ZeroFunctionError(QuniqError):
    code = "ZERO_FUNCTION"
