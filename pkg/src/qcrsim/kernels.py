"""Fixed-step RK4 propagation kernels for the vectorized Lindblad generator.

Two interchangeable implementations of the same arithmetic:

* ``rk4_propagate_jit``   - numba @njit loop (compiled once, cached)
* ``rk4_propagate_numpy`` - plain numpy loop of BLAS matvecs

``rk4_propagate`` dispatches to the jitted kernel unless numba is
unavailable or disabled via QCRSIM_NO_NUMBA=1 (see qcrsim.accel).
benchmarks/bench_kernels.py times one against the other.
"""

from __future__ import annotations

import numpy as np

from .accel import NUMBA_ENABLED, njit


@njit(cache=True)
def _rk4_loop_jit(gens, seg_ids, y0, dt, sample_every, out):  # pragma: no cover
    y = y0.copy()
    out[0] = y
    n_steps = seg_ids.shape[0]
    j = 1
    for i in range(n_steps):
        gen = gens[seg_ids[i]]
        k1 = gen @ y
        k2 = gen @ (y + (0.5 * dt) * k1)
        k3 = gen @ (y + (0.5 * dt) * k2)
        k4 = gen @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (i + 1) % sample_every == 0:
            out[j] = y
            j += 1
    return y


def _rk4_loop_numpy(gens, seg_ids, y0, dt, sample_every, out):
    y = y0.copy()
    out[0] = y
    j = 1
    for i in range(seg_ids.shape[0]):
        gen = gens[seg_ids[i]]
        k1 = gen @ y
        k2 = gen @ (y + (0.5 * dt) * k1)
        k3 = gen @ (y + (0.5 * dt) * k2)
        k4 = gen @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (i + 1) % sample_every == 0:
            out[j] = y
            j += 1
    return y


def _prepare(gens, seg_ids, y0):
    gens = np.ascontiguousarray(gens, dtype=np.complex128)
    seg_ids = np.ascontiguousarray(seg_ids, dtype=np.int64)
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
        raise ValueError(f"generators must be (k, D, D), got {gens.shape}")
    if y0.shape != (gens.shape[1],):
        raise ValueError("state vector does not match generator dimension")
    if seg_ids.size and (seg_ids.min() < 0 or seg_ids.max() >= gens.shape[0]):
        raise ValueError("segment index out of range")
    return gens, seg_ids, y0


def _alloc_out(n_steps, sample_every, dim):
    if sample_every < 1 or n_steps % sample_every:
        raise ValueError("sample_every must divide the number of steps")
    return np.empty((n_steps // sample_every + 1, dim), dtype=np.complex128)


def rk4_propagate_numpy(gens, seg_ids, y0, dt, sample_every=1):
    """Pure-numpy RK4 propagation; returns (samples, y_final)."""
    gens, seg_ids, y0 = _prepare(gens, seg_ids, y0)
    out = _alloc_out(seg_ids.shape[0], sample_every, y0.shape[0])
    y = _rk4_loop_numpy(gens, seg_ids, y0, float(dt), int(sample_every), out)
    return out, y


def rk4_propagate_jit(gens, seg_ids, y0, dt, sample_every=1):
    """Jitted RK4 propagation; identical arithmetic to the numpy path."""
    gens, seg_ids, y0 = _prepare(gens, seg_ids, y0)
    out = _alloc_out(seg_ids.shape[0], sample_every, y0.shape[0])
    y = _rk4_loop_jit(gens, seg_ids, y0, float(dt), int(sample_every), out)
    return out, y


if NUMBA_ENABLED:
    rk4_propagate = rk4_propagate_jit
else:
    rk4_propagate = rk4_propagate_numpy
