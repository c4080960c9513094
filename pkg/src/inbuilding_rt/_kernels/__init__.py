"""Grid kernels: a compiled backend with a numpy fallback chosen at import.

Set ``INBUILDING_RT_PURE=1`` to force the numpy backend.
"""

import os

from . import _grid_py
from .prepare import Prepared, prepare

try:
    if os.environ.get("INBUILDING_RT_PURE", "") not in ("", "0"):
        raise ImportError("compiled kernel disabled by INBUILDING_RT_PURE")
    from . import _grid_c as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _grid_py
    BACKEND = "numpy"

BACKENDS = {"numpy": _grid_py.power_at}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl.power_at

power_at = _impl.power_at

__all__ = ["BACKEND", "BACKENDS", "Prepared", "power_at", "prepare"]
