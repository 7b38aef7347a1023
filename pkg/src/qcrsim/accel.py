"""Optional numba acceleration.

The propagation kernels in :mod:`qcrsim.kernels` come in two flavours: a
numba @njit loop and a vectorized pure-numpy path.  Selection happens
here, once, at import time:

* numba missing            -> numpy path
* QCRSIM_NO_NUMBA=1 in env -> numpy path (useful for debugging and for
                              the benchmark baseline)
* otherwise                -> jitted path

Import NUMBA_ENABLED to find out which one is active.
"""

import logging
import os

logger = logging.getLogger(__name__)


def null_decorator(pyfunc=None, **kwargs):
    """Stand-in for numba decorators when numba is unavailable."""

    def wrap(func):
        return func

    if pyfunc is None:
        return wrap
    return wrap(pyfunc)


_disabled = os.environ.get("QCRSIM_NO_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

if _disabled:
    njit = null_decorator
    NUMBA_ENABLED = False
else:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        logger.warning("numba not importable; falling back to numpy kernels")
        njit = null_decorator
        NUMBA_ENABLED = False
