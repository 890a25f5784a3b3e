"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is the fallback
when it is missing or when ``QUNIQ_PURE`` is set to a non-empty value other
than ``0``.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("QUNIQ_PURE", "0") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

POWER_EXP = _pykernels.POWER_EXP
END_POINT = _pykernels.END_POINT

__all__ = ["kernels", "BACKEND", "POWER_EXP", "END_POINT"]
