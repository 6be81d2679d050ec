"""Numba toggle.

Set ``SUBMODBENCH_DISABLE_NUMBA=1`` to force the pure-numpy kernels even
when numba is installed.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an install dependency
    numba = None

HAVE_NUMBA = numba is not None
DISABLED = os.environ.get("SUBMODBENCH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(fn):
    """Compile ``fn`` in nopython mode; identity when numba is missing."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
