"""Numba switch shared by the hot kernels.

Set ``STRONGFIELD_NUMBA=0`` to run every kernel through its pure-numpy path.
The flag is read once at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _flag_enabled() -> bool:
    raw = os.environ.get("STRONGFIELD_NUMBA", "1").strip().lower()
    return raw not in ("0", "false", "no", "off")


USE_NUMBA = numba is not None and _flag_enabled()


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return numba.njit(*args, cache=True, **kwargs)
