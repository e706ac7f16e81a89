"""Selects the compiled tilt kernels when available.

Set ``FBLBOUNDS_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

if os.environ.get("FBLBOUNDS_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

IMPL = _impl.IMPL
moments = _impl.moments
moments_grid = _impl.moments_grid
log_g = _impl.log_g
bisect_mean = _impl.bisect_mean
bisect_log_g = _impl.bisect_log_g

__all__ = ["IMPL", "moments", "moments_grid", "log_g", "bisect_mean",
           "bisect_log_g"]
