"""Multimode twin-beam source simulator.

Models a pulsed parametric down-conversion source through spectral
filters, computing Schmidt mode structure and loss-independent
normalized photon-number correlations.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegradedAccuracyWarning,
    GridMismatchError,
    NumericalFailureError,
    TwinBeamError,
    UndefinedConditionalError,
    UndefinedMomentError,
)
from .spectral import (
    C_NM_PER_PS,
    FrequencyGrid,
    JointSpectralAmplitude,
    PhaseMatching,
    PumpEnvelope,
    SpectralFilter,
    bandwidth_to_detuning_fwhm,
    build_grid,
    build_jsa,
    default_span,
    fwhm_to_sigma,
    make_filter,
    pump_sigma_from_fundamental,
    wavelength_to_detuning,
)
from .schmidt import (
    MarginalKernel,
    SchmidtDecomposition,
    effective_k,
    filtered_kernel,
    k_parameter,
    marginal_kernel,
    schmidt_decompose,
)
from .correlators import (
    TwinBeamCorrelators,
    apply_filters,
    boundary_g12_mm,
    boundary_g12_sm,
    build_correlators,
    g,
    heralded_g2_click,
    noise_reduction_factor,
    wick_normal_moment,
)
from .fock_oracle import (
    FockDensityMatrix,
    SmallJsa,
    apply_loss,
    build_pdc_state,
    click_conditioned_g2,
    factorial_moment,
)
from .crosscheck import run_crosscheck
from .runner import (
    ResultTable,
    ScenarioConfig,
    bundled_config,
    emit,
    load_config,
    run_g_sweep,
    run_k_table,
    run_scenario,
)

__all__ = [
    "__version__",
    # errors
    "TwinBeamError",
    "GridMismatchError",
    "NumericalFailureError",
    "UndefinedMomentError",
    "UndefinedConditionalError",
    "ConfigError",
    "DegradedAccuracyWarning",
    # spectral
    "C_NM_PER_PS",
    "FrequencyGrid",
    "PumpEnvelope",
    "PhaseMatching",
    "JointSpectralAmplitude",
    "SpectralFilter",
    "build_grid",
    "build_jsa",
    "make_filter",
    "wavelength_to_detuning",
    "bandwidth_to_detuning_fwhm",
    "fwhm_to_sigma",
    "pump_sigma_from_fundamental",
    "default_span",
    # schmidt
    "SchmidtDecomposition",
    "MarginalKernel",
    "schmidt_decompose",
    "k_parameter",
    "marginal_kernel",
    "filtered_kernel",
    "effective_k",
    # correlators
    "TwinBeamCorrelators",
    "build_correlators",
    "apply_filters",
    "wick_normal_moment",
    "g",
    "heralded_g2_click",
    "noise_reduction_factor",
    "boundary_g12_sm",
    "boundary_g12_mm",
    # fock oracle
    "SmallJsa",
    "FockDensityMatrix",
    "build_pdc_state",
    "apply_loss",
    "factorial_moment",
    "click_conditioned_g2",
    # crosscheck
    "run_crosscheck",
    # runner
    "ScenarioConfig",
    "ResultTable",
    "load_config",
    "bundled_config",
    "run_k_table",
    "run_g_sweep",
    "run_scenario",
    "emit",
]
