"""Selection between compiled and pure-numpy kernel paths.

Setting ``FRACMECH_DISABLE_NUMBA=1`` forces the numpy fallbacks even when
numba is importable. The choice is made once, at import time.
"""

from __future__ import annotations

import functools
import os
from typing import Any, Callable

DISABLE_FLAG = "FRACMECH_DISABLE_NUMBA"


def _flag_set(value: str | None) -> bool:
    return value is not None and value.strip().lower() not in ("", "0", "false", "no")


try:  # pragma: no cover - exercised implicitly by import
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_set(os.environ.get(DISABLE_FLAG))


def jit(func: Callable[..., Any]) -> Callable[..., Any]:
    """Compile ``func`` in nopython mode when numba is available.

    Without numba the plain Python function is returned, which keeps the
    scalar helpers usable from the numpy path.
    """
    if not HAVE_NUMBA:
        return func
    return functools.partial(numba.njit, cache=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
