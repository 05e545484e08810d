"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``ROBUST_WELFARE_PURE_PYTHON=1`` to force the numpy versions.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("ROBUST_WELFARE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

repair_to_mean = _impl.repair_to_mean
cumulative_curve = _impl.cumulative_curve
eval_uniform_piecewise = _impl.eval_uniform_piecewise

__all__ = ["BACKEND", "repair_to_mean", "cumulative_curve", "eval_uniform_piecewise"]
