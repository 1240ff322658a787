"""Selects the pair-sum backend at import time.

The compiled Cython kernels are used when available; otherwise the numpy
fallback. Set POTLAB_BACKEND=numpy or =cython to force a choice (forcing
cython raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _pairsum_np

_FORCED = os.environ.get("POTLAB_BACKEND")

if _FORCED not in (None, "", "numpy", "cython"):
    raise ImportError(f"POTLAB_BACKEND must be 'numpy' or 'cython', got {_FORCED!r}")

_impl = None
if _FORCED != "numpy":
    try:
        from . import _pairsum_cy as _impl
    except ImportError:
        if _FORCED == "cython":
            raise
        _impl = None

if _impl is None:
    _impl = _pairsum_np
    BACKEND_NAME = "numpy"
else:
    BACKEND_NAME = "cython"


def implementations():
    """(name, module) pairs of every available backend, for benchmarks/tests."""
    out = [("numpy", _pairsum_np)]
    try:
        from . import _pairsum_cy
        out.append(("cython", _pairsum_cy))
    except ImportError:
        pass
    return out


pair_quadratic_form = _impl.pair_quadratic_form
pair_quadratic_form_bessel = _impl.pair_quadratic_form_bessel
kernel_apply = _impl.kernel_apply
potential_sum = _impl.potential_sum
gradient_sum = _impl.gradient_sum
