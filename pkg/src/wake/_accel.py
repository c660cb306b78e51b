"""Kernel selection between numba-compiled loops and the numpy fallback.

Set ``WAKE_DISABLE_NUMBA=1`` before import to force the pure numpy path.
The flag is read once; use :func:`use_numba` to query the active path.
"""
import os

_DISABLED = os.environ.get("WAKE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False


def use_numba():
    return HAVE_NUMBA


def njit(func):
    """Compile ``func`` with numba when enabled, else return ``None``.

    Callers keep a numpy implementation alongside and pick whichever is
    available, so a missing compiler never changes results beyond rounding.
    """
    if not HAVE_NUMBA:
        return None
    return _njit(cache=False, nogil=True)(func)
