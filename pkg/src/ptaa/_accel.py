"""Numba switch.

Set ``PTAA_DISABLE_NUMBA=1`` to run every kernel through its pure
Python/numpy path. Numba missing from the environment has the same effect.
"""
import os

_FLAG = os.environ.get("PTAA_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV


def jit(fn):
    """``njit(cache=True, nogil=True)`` when numba is active, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend():
    return "numba" if USE_NUMBA else "python"
