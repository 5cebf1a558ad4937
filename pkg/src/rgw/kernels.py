"""Kernel backend selected at import time.

The compiled extension ``rgw._kernels`` is used when it imports; otherwise,
or when the environment variable ``RGW_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the pure-Python twin ``rgw._kernels_py`` is used.
Both produce identical results for identical inputs.
"""

import os

from . import _kernels_py

if os.environ.get("RGW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

pi_integral = _impl.pi_integral
urn_walk = _impl.urn_walk
urn_batch = _impl.urn_batch

__all__ = ["BACKEND", "pi_integral", "urn_walk", "urn_batch"]
