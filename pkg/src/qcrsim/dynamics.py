"""Lindblad dynamics of the transmon ladder under the tunable bath.

The master equation (frequencies in GHz, hence the explicit 2*pi)

    drho/dt = -2*pi*i [H, rho]
              + sum_m gamma_down(m) D[|m><m+1|] rho
              + sum_m gamma_up(m)   D[|m+1><m|] rho

is integrated with a deterministic fixed-step RK4 scheme acting on the
vectorized generator, with the rates held piecewise constant over each
half-period of the bias pulse.  Dissipators act directly on the transmon
ladder; the resonators enter through the rate model only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import thermometry
from .constants import H_OVER_KB
from .kernels import rk4_propagate
from .qcr import CouplingSpec, JunctionSpec, RateTable, transition_rates
from .system import SystemSpec, TransmonSpec, transmon_energies

TRACE_TOL = 1e-9
HERM_TOL = 1e-10
EIG_TOL = 1e-9
ABORT_TRACE_DRIFT = 1e-6
ABORT_NEG_EIG = -1e-6


class IntegratorError(RuntimeError):
    """Trace or positivity blew past its bound during integration."""


class DensityMatrix:
    """Density matrix with validation against hermiticity, trace and
    positivity tolerances.

    Construct from a raw matrix, from populations, or with the ``gibbs``
    / ``level`` convenience constructors.
    """

    def __init__(self, matrix, validate: bool = True):
        self.matrix = np.asarray(matrix, dtype=complex)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"density matrix must be square, got {self.matrix.shape}")
        if validate:
            self.validate()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> "DensityMatrix":
        m = self.matrix
        scale = max(1.0, float(np.abs(m).max()))
        herm = np.abs(m - m.conj().T).max() / scale
        if herm > HERM_TOL:
            raise ValueError(f"not hermitian: relative deviation {herm:.2e}")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond {TRACE_TOL}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if min_eig < -EIG_TOL:
            raise ValueError(f"negative eigenvalue {min_eig:.2e}")
        return self

    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    @classmethod
    def from_populations(cls, p) -> "DensityMatrix":
        p = np.asarray(p, dtype=float)
        return cls(np.diag(p.astype(complex)))

    @classmethod
    def gibbs(cls, temperature: float, spec: TransmonSpec) -> "DensityMatrix":
        """Gibbs state of the truncated ladder at ``temperature`` (K)."""
        if temperature <= 0:
            raise ValueError(f"temperature must be positive, got {temperature}")
        e = transmon_energies(spec)
        p = np.exp(-H_OVER_KB * e / temperature)
        return cls.from_populations(p / p.sum())

    @classmethod
    def level(cls, n: int, spec: TransmonSpec) -> "DensityMatrix":
        """Ladder eigenstate |n><n|."""
        if not 0 <= n < spec.n_levels:
            raise ValueError(f"level {n} outside ladder of {spec.n_levels} states")
        p = np.zeros(spec.n_levels)
        p[n] = 1.0
        return cls.from_populations(p)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """T(a, b) = (1/2) ||a - b||_1."""
    eigs = np.linalg.eigvalsh(a.matrix - b.matrix)
    return 0.5 * float(np.abs(eigs).sum())


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clipped to [0, 1]."""
    evals, vecs = np.linalg.eigh(a.matrix)
    sqrt_a = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    inner = sqrt_a @ b.matrix @ sqrt_a
    seigs = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sqrt(np.clip(seigs, 0.0, None)).sum() ** 2)
    return min(f, 1.0)


@dataclass(frozen=True)
class BiasPulse:
    """Net-zero square bias drive.

    dc_offset +- amplitude alternating every half period during
    [0, duration), zero afterwards.  The ac part integrates to zero, so
    the waveform integrates to dc_offset * duration.

    All times in ns, voltages in mV.
    """

    dc_offset: float = 0.0
    amplitude: float = 1.2
    duration: float = 100.0
    period: float = 10.0
    rise_time: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"duration must be non-negative, got {self.duration}")
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        if self.rise_time < 0:
            raise ValueError(f"rise_time must be non-negative, got {self.rise_time}")
        if self.rise_time > 0:
            raise NotImplementedError(
                "only ideal square edges (rise_time=0) exist"
            )
        if self.amplitude > 0 and self.duration > 0:
            cycles = self.duration / self.period
            if abs(cycles - round(cycles)) > 1e-9:
                raise ValueError(
                    "duration must be an integer number of periods so the ac "
                    f"part cancels; got duration/period = {cycles}"
                )


def pulse_voltage(pulse: BiasPulse, t):
    """Instantaneous bias (mV) of the square pulse at time t (ns).

    Vectorized over t.  Only ideal square edges exist; BiasPulse rejects
    rise_time > 0 at construction.
    """
    t = np.asarray(t, dtype=float)
    phase = np.mod(t, pulse.period)
    square = np.where(phase < 0.5 * pulse.period, pulse.amplitude, -pulse.amplitude)
    v = np.where(
        (t >= 0.0) & (t < pulse.duration),
        pulse.dc_offset + square,
        0.0,
    )
    if v.ndim == 0:
        return float(v)
    return v


def lindblad_generator(hamiltonian: np.ndarray, rates: RateTable) -> np.ndarray:
    """Vectorized Lindblad generator (row-major vec convention).

    vec(drho/dt) = L vec(rho) with L of shape (d^2, d^2); hamiltonian is
    d x d in GHz, rates hold the d-1 ladder pairs in 1/ns.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    if rates.gamma_down.shape[0] != d - 1:
        raise ValueError(
            f"rate table has {rates.gamma_down.shape[0]} pairs, need {d - 1}"
        )
    eye = np.eye(d, dtype=complex)
    gen = -2j * np.pi * (np.kron(h, eye) - np.kron(eye, h.T))
    for m in range(d - 1):
        for rate, (i, j) in (
            (rates.gamma_down[m], (m, m + 1)),  # |m><m+1|
            (rates.gamma_up[m], (m + 1, m)),  # |m+1><m|
        ):
            if rate == 0.0:
                continue
            op = np.zeros((d, d), dtype=complex)
            op[i, j] = 1.0
            opdag_op = op.conj().T @ op
            gen += rate * (
                np.kron(op, op.conj())
                - 0.5 * (np.kron(opdag_op, eye) + np.kron(eye, opdag_op.T))
            )
    return gen


@dataclass
class Trajectory:
    """Sampled populations along one integration run.

    times in ns; populations has one row per sample and one column per
    ladder state; final is the end-of-run density matrix.
    """

    times: np.ndarray
    populations: np.ndarray
    final: DensityMatrix
    transmon: TransmonSpec
    pulse: BiasPulse | None = None
    states: np.ndarray | None = field(default=None, repr=False)

    @cached_property
    def temperatures(self) -> np.ndarray:
        """Per-sample Gibbs-fit temperature (K); NaN where non-thermal."""
        out = np.full(self.times.shape[0], np.nan)
        for i, p in enumerate(self.populations):
            fit = thermometry.fit_gibbs(p[: min(4, p.size)], self.transmon)
            if fit.thermal:
                out[i] = fit.temperature
        return out


def _n_steps(span: float, dt: float, what: str) -> int:
    steps = span / dt
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError(f"dt={dt} must evenly divide {what}={span}")
    return int(round(steps))


def _segment_ids(pulse: BiasPulse, dt: float, n_steps: int):
    """Per-step voltage and the distinct |V| list for the whole run."""
    v_plus = pulse.dc_offset + pulse.amplitude
    v_minus = pulse.dc_offset - pulse.amplitude

    pulse_steps = min(_n_steps(pulse.duration, dt, "duration"), n_steps)
    if pulse.amplitude > 0 and pulse.duration > 0:
        half_steps = _n_steps(0.5 * pulse.period, dt, "half period")
    else:
        half_steps = max(pulse_steps, 1)

    volts = np.zeros(n_steps)
    idx = np.arange(pulse_steps)
    volts[:pulse_steps] = np.where((idx // half_steps) % 2 == 0, v_plus, v_minus)

    magnitudes = np.round(np.abs(volts), 12)
    distinct = np.unique(magnitudes)
    seg_ids = np.searchsorted(distinct, magnitudes)
    return seg_ids.astype(np.int64), distinct


def propagate(
    rho0: DensityMatrix,
    hamiltonian: np.ndarray,
    generators: np.ndarray,
    seg_ids: np.ndarray,
    dt: float,
    sample_every: int = 1,
    keep_states: bool = False,
    transmon: TransmonSpec | None = None,
    pulse: BiasPulse | None = None,
) -> Trajectory:
    """RK4 propagation under piecewise-constant generators.

    Low-level entry point shared by ``evolve`` and the engine-cycle code;
    monitors trace drift and positivity at every sample and aborts with
    an IntegratorError diagnostic when either passes 1e-6.
    """
    d = rho0.dim
    samples, y_end = rk4_propagate(
        generators, seg_ids, rho0.matrix.reshape(-1), dt, sample_every
    )
    n_samples = samples.shape[0]
    times = np.arange(n_samples) * (dt * sample_every)

    rhos = samples.reshape(n_samples, d, d)
    traces = np.einsum("tii->t", rhos).real
    drift = np.abs(traces - 1.0)
    if drift.max() > ABORT_TRACE_DRIFT:
        k = int(np.argmax(drift > ABORT_TRACE_DRIFT))
        raise IntegratorError(
            f"trace drift {drift[k]:.3e} at t={times[k]:.3f} ns "
            f"(step {k * sample_every}, dt={dt})"
        )
    herm = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    min_eigs = np.linalg.eigvalsh(herm)[:, 0]
    if min_eigs.min() < ABORT_NEG_EIG:
        k = int(np.argmin(min_eigs))
        raise IntegratorError(
            f"negative eigenvalue {min_eigs[k]:.3e} at t={times[k]:.3f} ns "
            f"(step {k * sample_every}, dt={dt})"
        )

    populations = rhos.diagonal(axis1=1, axis2=2).real.copy()
    final = DensityMatrix(y_end.reshape(d, d), validate=False)
    trans = transmon if transmon is not None else TransmonSpec(n_levels=d)
    return Trajectory(
        times=times,
        populations=populations,
        final=final,
        transmon=trans,
        pulse=pulse,
        states=rhos if keep_states else None,
    )


def evolve(
    rho0: DensityMatrix,
    system: SystemSpec,
    junction: JunctionSpec,
    coupling: CouplingSpec,
    pulse: BiasPulse,
    dt: float = 0.1,
    t_end: float | None = None,
    sample_every: int = 1,
) -> Trajectory:
    """Integrate the pulsed master equation from ``rho0``.

    The bare ladder Hamiltonian supplies the coherent part; rates are
    rebuilt once per distinct |V| taken by the pulse (the tunneling rates
    are even in V, so the net-zero square drive acts as a constant-|V|
    bath when dc_offset = 0).

    Parameters
    ----------
    rho0 : DensityMatrix
        Initial ladder state, dimension transmon.n_levels.
    dt : float
        RK4 step in ns; must divide the half period, the pulse duration
        and t_end.
    t_end : float
        Total integration time in ns (default: pulse duration).
    sample_every : int
        Record every k-th step into the trajectory.
    """
    if pulse.rise_time != 0.0:
        raise NotImplementedError("evolve requires ideal square edges (rise_time=0)")
    transmon = system.transmon
    if rho0.dim != transmon.n_levels:
        raise ValueError(
            f"state dimension {rho0.dim} != ladder size {transmon.n_levels}"
        )
    if t_end is None:
        t_end = pulse.duration
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")

    n_steps = _n_steps(t_end, dt, "t_end")
    seg_ids, magnitudes = _segment_ids(pulse, dt, n_steps)

    h = np.diag(transmon_energies(transmon))
    tables = [transition_rates(system, junction, coupling, v) for v in magnitudes]
    gens = np.stack([lindblad_generator(h, tb) for tb in tables])

    return propagate(
        rho0,
        h,
        gens,
        seg_ids,
        dt,
        sample_every=sample_every,
        transmon=transmon,
        pulse=pulse,
    )


def evolve_constant(
    rho0: DensityMatrix,
    hamiltonian: np.ndarray,
    rates: RateTable,
    dt: float,
    t_end: float,
    sample_every: int = 1,
    transmon: TransmonSpec | None = None,
) -> Trajectory:
    """Propagate under a single fixed rate table (no pulse bookkeeping)."""
    n_steps = _n_steps(t_end, dt, "t_end")
    gen = lindblad_generator(hamiltonian, rates)
    seg_ids = np.zeros(n_steps, dtype=np.int64)
    return propagate(
        rho0,
        hamiltonian,
        gen[np.newaxis],
        seg_ids,
        dt,
        sample_every=sample_every,
        transmon=transmon,
    )


def steady_state_from_rates(
    hamiltonian: np.ndarray, rates: RateTable
) -> DensityMatrix:
    """Null vector of the generator, trace-normalized.

    Solves the stacked system [L; trace] x = [0; 1] by least squares with
    one pass of iterative refinement, and insists on a generator residual
    below 1e-9 relative to ||L||.
    """
    if float(np.max(rates.gamma_down) if rates.gamma_down.size else 0.0) <= 0.0 and (
        float(np.max(rates.gamma_up) if rates.gamma_up.size else 0.0) <= 0.0
    ):
        raise ValueError("all rates vanish; the steady state is degenerate")
    gen = lindblad_generator(hamiltonian, rates)
    d = hamiltonian.shape[0]
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[:: d + 1] = 1.0

    a = np.vstack([gen, trace_row])
    b = np.zeros(d * d + 1, dtype=complex)
    b[-1] = 1.0
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    for _ in range(3):
        resid = b - a @ x
        corr, *_ = np.linalg.lstsq(a, resid, rcond=None)
        x = x + corr

    gen_scale = max(1.0, float(np.linalg.norm(gen, ord=np.inf)))
    residual = float(np.linalg.norm(gen @ x)) / gen_scale
    if residual > 1e-9:
        raise RuntimeError(f"steady-state residual {residual:.2e} above 1e-9")

    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= rho.trace().real
    return DensityMatrix(rho)


def steady_state(
    system: SystemSpec,
    junction: JunctionSpec,
    coupling: CouplingSpec,
    v: float,
) -> DensityMatrix:
    """Stationary ladder state under a constant bias |v| (mV)."""
    h = np.diag(transmon_energies(system.transmon))
    rates = transition_rates(system, junction, coupling, v)
    return steady_state_from_rates(h, rates)


def two_level_relaxation(
    p_e0: float, gamma_down: float, gamma_up: float, t
) -> np.ndarray:
    """Closed-form qubit excited population under constant rates.

    p_e(t) = p_inf + (p_e(0) - p_inf) exp(-(gd+gu) t) with
    p_inf = gu/(gd+gu); the analytic oracle for the integrator.
    """
    total = gamma_down + gamma_up
    p_inf = gamma_up / total
    return p_inf + (p_e0 - p_inf) * np.exp(-total * np.asarray(t, dtype=float))
