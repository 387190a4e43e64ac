"""Backend selection for the hot kernels.

The compiled extension is used when it is importable; set the environment
variable ``NATIVESPACE_PURE=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("NATIVESPACE_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernels as _backend

    BACKEND = "cython"
except ImportError:
    _backend = _pykernels
    BACKEND = "python"

green_sums = _backend.green_sums

__all__ = ["BACKEND", "green_sums"]
