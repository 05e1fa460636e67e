"""Kernel dispatch: the compiled extension when it imports, numpy otherwise.

Set ``UNILDPC_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _fallback

BACKEND = "python"
boxplus_magnitudes = _fallback.boxplus_magnitudes
bp_decode = _fallback.bp_decode

if not os.environ.get("UNILDPC_PURE_PYTHON"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        boxplus_magnitudes = _kernels.boxplus_magnitudes
        bp_decode = _kernels.bp_decode


def backends():
    """Map of available backend name -> module, for benchmarks and cross-checks."""
    found = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
