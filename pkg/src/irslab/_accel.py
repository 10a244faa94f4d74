"""Selection between numba-compiled kernels and the pure-numpy path.

Set ``IRSLAB_DISABLE_NUMBA=1`` to force the fallback path. The flag is read
once at import time.
"""
import os

_flag = os.environ.get("IRSLAB_DISABLE_NUMBA", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

NUMBA_ENABLED = _numba is not None and _flag not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` with numba, or return an uncompiled copy.

    The uncompiled copy is still exported so tests can run both paths.
    """
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
