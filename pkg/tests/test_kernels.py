import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcrsim.kernels import (
    rk4_propagate,
    rk4_propagate_jit,
    rk4_propagate_numpy,
)


@pytest.fixture()
def small_problem():
    rng = np.random.default_rng(7)
    dim = 16
    gen = 0.02 * (
        rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    )
    # make it mildly contractive so long runs stay bounded
    gen -= 0.05 * np.eye(dim)
    y0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    seg_ids = np.zeros(400, dtype=np.int64)
    return gen[np.newaxis].copy(), seg_ids, y0


def test_jit_and_numpy_paths_agree_exactly(small_problem):
    """Same arithmetic, same BLAS: the two paths must agree bitwise."""
    gens, seg_ids, y0 = small_problem
    s_jit, y_jit = rk4_propagate_jit(gens, seg_ids, y0.copy(), 0.1, 10)
    s_np, y_np = rk4_propagate_numpy(gens, seg_ids, y0.copy(), 0.1, 10)
    assert np.array_equal(s_jit, s_np)
    assert np.array_equal(y_jit, y_np)


def test_dispatch_points_at_one_of_the_paths():
    assert rk4_propagate in (rk4_propagate_jit, rk4_propagate_numpy)


def test_sample_layout(small_problem):
    # row 0 is the initial state, then one row per sample_every steps
    gens, seg_ids, y0 = small_problem
    samples, y_final = rk4_propagate(gens, seg_ids, y0.copy(), 0.05, 40)
    assert samples.shape == (len(seg_ids) // 40 + 1, y0.size)
    assert np.array_equal(samples[0], y0)
    assert np.array_equal(samples[-1], y_final)


def test_exponential_decay_against_closed_form():
    # scalar dy/dt = -0.3 y has a solution we can write down
    gen = np.array([[[-0.3 + 0.0j]]])
    seg = np.zeros(1000, dtype=np.int64)
    y0 = np.array([2.0 + 0.0j])
    samples, y_final = rk4_propagate(gen, seg, y0, 0.01, 100)
    t = 0.01 * 100 * np.arange(11)
    assert_allclose(samples[:, 0].real, 2.0 * np.exp(-0.3 * t), rtol=1e-10)


def test_fourth_order_convergence():
    rng = np.random.default_rng(3)
    dim = 8
    gen = 0.05 * (
        rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    )
    y0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)

    def end_state(dt, n):
        seg = np.zeros(n, dtype=np.int64)
        _, y = rk4_propagate(gen[np.newaxis], seg, y0.copy(), dt, n)
        return y

    ref = end_state(0.0125, 1280)
    err_coarse = np.abs(end_state(0.2, 80) - ref).max()
    err_fine = np.abs(end_state(0.1, 160) - ref).max()
    ratio = err_coarse / err_fine
    assert 10.0 < ratio < 24.0


def test_segment_switching_changes_generator():
    gen_a = np.array([[[-0.1 + 0.0j]]])
    gen_b = np.array([[[-0.5 + 0.0j]]])
    gens = np.concatenate([gen_a, gen_b])
    seg = np.array([0] * 50 + [1] * 50, dtype=np.int64)
    y0 = np.array([1.0 + 0.0j])
    _, y = rk4_propagate(gens, seg, y0, 0.1, 100)
    expected = np.exp(-0.1 * 5.0) * np.exp(-0.5 * 5.0)
    assert y[0].real == pytest.approx(expected, rel=1e-6)


def test_env_flag_selects_numpy_path():
    code = (
        "import qcrsim.kernels as k, qcrsim.accel as a; "
        "print(k.rk4_propagate is k.rk4_propagate_numpy, a.NUMBA_ENABLED)"
    )
    env = dict(os.environ, QCRSIM_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.split() == ["True", "False"]
