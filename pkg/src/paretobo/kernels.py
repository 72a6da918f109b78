"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when the
``PARETOBO_PURE_PYTHON`` environment variable is set to a non-empty value
other than ``0``) the NumPy implementations are used. ``BACKEND`` names the
active choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("PARETOBO_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

nondominated_ranks = _impl.nondominated_ranks
crowding_distance = _impl.crowding_distance
simplex_pivots = _impl.simplex_pivots
lloyd = _impl.lloyd


def available_backends():
    """Map backend name -> module, for tests and benchmarks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
