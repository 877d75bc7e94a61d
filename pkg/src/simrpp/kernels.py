"""Backend selection for the hot kernels.

The compiled module is used when it was built; set ``SIMRPP_BACKEND=python``
to force the pure-Python reference. Both expose identical functions.
"""
import os

import numpy as np

from simrpp import _pykernels

_forced = os.environ.get("SIMRPP_BACKEND", "").lower()

if _forced == "python":
    _impl = _pykernels
else:
    try:
        from simrpp import _ckernels as _impl
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

point_static_free = _impl.point_static_free
sweep_static_free = _impl.sweep_static_free
sweep_static_free_many = _impl.sweep_static_free_many
pair_interval = _impl.pair_interval
trajectory_pair_intervals = _impl.trajectory_pair_intervals
stationary_intervals = _impl.stationary_intervals
earliest_arrival = _impl.earliest_arrival
earliest_arrival_many = _impl.earliest_arrival_many
earliest_arrival_sampled = _impl.earliest_arrival_sampled

EMPTY_SEGMENTS = np.zeros((0, 7))


def backends():
    """Map of backend name to kernel module, for cross-checks and benchmarks."""
    out = {"python": _pykernels}
    try:
        from simrpp import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def as_rows(a, width):
    """C-contiguous float64 view with the given column count (empty-safe)."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, width))
    return arr.reshape(-1, width)
