#!/usr/bin/env python3
"""Benchmark the two RK4 propagation kernels against each other.

Times the numba @njit loop and the pure-numpy fallback on the same
inputs (the physical 6-level ladder generator at 1.2 mV, plus a larger
synthetic generator for scaling), verifies the outputs are bitwise
identical, and reports median wall times and the speedup.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--steps N] [--repeats R]

To force the package-wide dispatch onto the numpy path instead (e.g.
when debugging), set QCRSIM_NO_NUMBA=1; this script always calls both
kernels explicitly, so the flag does not change what is measured here,
only whether the jitted kernel exists to be measured.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from qcrsim.accel import NUMBA_ENABLED
from qcrsim.dynamics import DensityMatrix, lindblad_generator
from qcrsim.kernels import rk4_propagate_jit, rk4_propagate_numpy
from qcrsim.qcr import CouplingSpec, JunctionSpec, transition_rates
from qcrsim.seeding import named_rng
from qcrsim.system import SystemSpec, transmon_energies


def physical_case() -> tuple[np.ndarray, np.ndarray]:
    """6-level ladder generator at 1.2 mV and its initial state vector."""
    system = SystemSpec()
    table = transition_rates(system, JunctionSpec(), CouplingSpec(), 1.2)
    h = np.diag(transmon_energies(system.transmon))
    gen = lindblad_generator(h, table)
    rho0 = DensityMatrix.gibbs(0.11, system.transmon)
    return np.array([gen]), rho0.matrix.reshape(-1)


def synthetic_case(dim: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random contraction generator of vec dimension dim*dim."""
    rng = named_rng(seed, "bench")
    d2 = dim * dim
    gen = rng.standard_normal((d2, d2)) + 1j * rng.standard_normal((d2, d2))
    gen = -0.01 * (gen @ gen.conj().T)  # negative semidefinite: stable
    y0 = np.zeros(d2, dtype=np.complex128)
    y0[0] = 1.0
    return np.array([gen]), y0


def time_kernel(kernel, gens, seg_ids, y0, dt, repeats) -> tuple[float, np.ndarray]:
    times = []
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out, _ = kernel(gens, seg_ids, y0, dt)
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def run_case(name, gens, y0, steps, repeats):
    seg_ids = np.zeros(steps, dtype=np.int64)
    dt = 0.1
    t_np, out_np = time_kernel(
        rk4_propagate_numpy, gens, seg_ids, y0, dt, repeats
    )
    line = f"{name:28s} numpy {t_np * 1e3:9.2f} ms"
    if NUMBA_ENABLED:
        rk4_propagate_jit(gens, seg_ids[:2], y0, dt)  # compile outside timing
        t_jit, out_jit = time_kernel(
            rk4_propagate_jit, gens, seg_ids, y0, dt, repeats
        )
        match = "bitwise-identical" if np.array_equal(out_np, out_jit) else (
            "OUTPUTS DIFFER"
        )
        line += f"   numba {t_jit * 1e3:9.2f} ms   speedup {t_np / t_jit:5.2f}x   {match}"
    else:
        line += "   (numba disabled or unavailable; numpy path only)"
    print(line)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--steps", type=int, default=20_000, help="RK4 steps per run"
    )
    parser.add_argument(
        "--repeats", type=int, default=5, help="timed repetitions (median)"
    )
    args = parser.parse_args(argv)

    print(
        f"rk4 kernels: {args.steps} steps, median of {args.repeats} runs "
        f"(numba {'enabled' if NUMBA_ENABLED else 'DISABLED'})"
    )
    gens, y0 = physical_case()
    run_case("6-level ladder (vec dim 36)", gens, y0, args.steps, args.repeats)
    gens, y0 = synthetic_case(12)
    run_case("synthetic 12x12 (vec dim 144)", gens, y0, args.steps, args.repeats)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
