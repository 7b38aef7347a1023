"""Transmon + quantum-circuit-refrigerator simulator and analysis toolkit.

Modules
-------
system      transmon/resonator specs, Hamiltonian, dressed spectra
qcr         NIS-junction physics: Dynes DOS, tunneling rates, IV analysis
dynamics    Lindblad evolution of the ladder under the biased junction
readout     IQ shot synthesis, Gaussian-mixture fits, population recovery
thermometry Gibbs / saturation / heating-slope fits
otto        four-stroke quantum Otto cycle
calibrate   rate-scale calibration against the heating anchor
config      strict key-value experiment configuration
cli         command-line interface and reproducible pipelines
"""

from .accel import NUMBA_ENABLED
from .calibrate import CalibrationResult, calibrate_kappa_eff, heated_temperature
from .config import ConfigError, ExperimentConfig, load_config
from .constants import AJ_PER_GHZ, H_MEV_PER_GHZ, H_OVER_KB, KB_MEV_PER_K
from .dynamics import (
    BiasPulse,
    DensityMatrix,
    IntegratorError,
    Trajectory,
    evolve,
    evolve_constant,
    fidelity,
    lindblad_generator,
    pulse_voltage,
    steady_state,
    steady_state_from_rates,
    trace_distance,
    two_level_relaxation,
)
from .otto import OttoResult, OttoSpec, frequency_efficiency, run_cycle
from .qcr import (
    CouplingSpec,
    DynesFit,
    JunctionSpec,
    NoGapError,
    RatePair,
    RateTable,
    dynes_dos,
    effective_temperature,
    extract_dynes,
    nis_current,
    transition_rates,
    tunnel_spectral_fn,
)
from .readout import (
    CovarianceCollapseError,
    GmmModel,
    PopulationEstimate,
    ReadoutModel,
    SingularCorrectionError,
    correction_matrix,
    default_model,
    estimate_populations,
    fit_gmm,
    fraction_within_sigma,
    mahalanobis_sq,
    synthesize_shots,
)
from .seeding import named_rng
from .system import (
    ResonatorSpec,
    Spectrum,
    SystemSpec,
    TransmonSpec,
    build_hamiltonian,
    diagonalize,
    dispersive_shift,
    readout_pull,
    transition_frequencies,
    transmon_energies,
)
from .thermometry import (
    GibbsFit,
    SaturationFit,
    fit_gibbs,
    fit_saturation,
    gibbs_populations,
    heating_slope,
    normalize_leading,
)

__version__ = "0.1.0"
