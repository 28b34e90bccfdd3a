"""Hot numeric kernels with two interchangeable backends.

``ROTEQ_BACKEND=numpy`` forces the pure-numpy path; anything else (default)
uses numba when it imports cleanly. Both backends are deterministic, but they
are not guaranteed to agree bit-for-bit with each other.
"""

import logging
import os

import numpy as np

from . import _numpy

logger = logging.getLogger(__name__)

_requested = os.environ.get("ROTEQ_BACKEND", "numba").strip().lower()

if _requested == "numpy":
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        logger.warning("numba unavailable, falling back to numpy kernels")
        _impl = _numpy
        BACKEND = "numpy"


def eig3_batch(a):
    return _impl.eig3_batch(np.ascontiguousarray(a, dtype=np.float64))


def qr3_batch(a):
    return _impl.qr3_batch(np.ascontiguousarray(a, dtype=np.float64))


def mode_rotate(t, r, order):
    t = np.ascontiguousarray(t, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    return _impl.mode_rotate(t, r, order)


def presort(x):
    """Stable per-column argsort, shape ``(n, d)``."""
    return np.ascontiguousarray(np.argsort(x, axis=0, kind="stable"), dtype=np.int64)


def best_split_sorted(x, y, order, member):
    f, t, gain = _impl.best_split_sorted(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        order,
        np.ascontiguousarray(member, dtype=np.bool_),
    )
    return int(f), float(t), float(gain)


def best_split(x, y):
    """Best squared-error split of ``(x, y)``: ``(feature, threshold, gain)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    return best_split_sorted(x, y, presort(x), np.ones(len(x), dtype=np.bool_))


__all__ = ["BACKEND", "eig3_batch", "qr3_batch", "mode_rotate", "best_split", "best_split_sorted", "presort"]
