"""Numba switch.

Set ``SIQRCTL_DISABLE_JIT=1`` to run every kernel through the plain
Python/numpy path (useful for debugging and for the fallback benchmark).
"""

import os

_flag = os.environ.get("SIQRCTL_DISABLE_JIT", "").strip().lower()
JIT_ENABLED = _flag not in ("1", "true", "yes", "on")

if JIT_ENABLED:
    try:
        from numba import njit
        from numba.extending import is_jitted
    except ImportError:  # pragma: no cover - numba is a hard dependency
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper

    def is_jitted(func):
        return False


__all__ = ["JIT_ENABLED", "njit", "is_jitted"]
