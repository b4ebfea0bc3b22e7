"""Select the compiled core or the NumPy fallback at import time.

Set ``RKHSBUILD_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("RKHSBUILD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

cross_gram = _impl.cross_gram
pivoted_cholesky = _impl.pivoted_cholesky
toeplitz_quadratic = _impl.toeplitz_quadratic

BROWNIAN_MIN = _fallback.BROWNIAN_MIN
BESSEL_SERIES = _fallback.BESSEL_SERIES
FBM_SINGULAR = _fallback.FBM_SINGULAR
GAUSS_RBF = _fallback.GAUSS_RBF
