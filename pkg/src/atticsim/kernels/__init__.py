"""Ray-cast kernel selection: compiled extension if available, numpy otherwise.

Set ATTICSIM_FORCE_FALLBACK=1 to force the numpy implementation.
"""

import os

import numpy as np

from . import fallback

if os.environ.get("ATTICSIM_FORCE_FALLBACK"):
    _impl = fallback
    KERNEL_BACKEND = "numpy"
else:
    try:
        from . import _raycast as _impl  # type: ignore[attr-defined]
        KERNEL_BACKEND = "cython"
    except ImportError:
        _impl = fallback
        KERNEL_BACKEND = "numpy"


def raycast(origin, dirs, tris, t_min=1e-6):
    origin = np.ascontiguousarray(origin, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    return _impl.raycast(origin, dirs, tris, t_min)


__all__ = ["raycast", "KERNEL_BACKEND", "fallback"]
