"""Backend switch for the compiled kernels.

Set ``MORREYLORENTZ_BACKEND=numpy`` to force the pure-numpy fallback even when
numba is importable.  Both paths compute the same quantities; only summation
order (and therefore the last few bits) may differ.
"""

import os

_requested = os.environ.get("MORREYLORENTZ_BACKEND", "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError("numba disabled by MORREYLORENTZ_BACKEND")
    from numba import njit, prange

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator

    prange = range

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"


def use_numba() -> bool:
    return NUMBA_AVAILABLE
