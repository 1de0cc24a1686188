"""Optional numba acceleration.

Set ``LOSRCERT_NO_NUMBA=1`` before import to force the pure-numpy code paths.
Modules with hot loops keep a vectorised numpy twin of every jitted kernel and
pick one at import time based on :data:`NUMBA_ENABLED`.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("LOSRCERT_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("disabled by LOSRCERT_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        # identity decorator; the jitted body is never selected when disabled
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
