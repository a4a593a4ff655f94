"""Numba switch.

Set ``DSMSWAP_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or on platforms without an LLVM toolchain.
"""
import os

DISABLED = os.environ.get("DSMSWAP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    import numba
except ImportError:
    numba = None

HAVE_NUMBA = numba is not None


def njit(func):
    """``numba.njit(cache=True)`` when numba is usable, else raises."""
    if numba is None:
        raise RuntimeError("numba is unavailable or disabled")
    return numba.njit(cache=True)(func)
