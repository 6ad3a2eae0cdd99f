"""Switch between numba-compiled kernels and their pure-numpy fallbacks.

Set ``OCFOREST_DISABLE_NUMBA=1`` before import to force the numpy path.
Both paths are always importable so they can be checked against each other.
"""
import os

_FLAG = os.environ.get("OCFOREST_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(jitted, fallback):
    return jitted if USE_NUMBA else fallback
