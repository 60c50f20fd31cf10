"""Flux-qubit workbench: circuit spectrum, driven qubit, bath and oscillator models."""

__version__ = "0.1.0"

from .circuit import (
    CircuitParams,
    SpectralResult,
    diagonalize,
    flux_sweep,
    loop_current_matrix,
    parity_classification,
    third_junction_current_matrix,
)
from .driven import (
    DriveParams,
    TwoLevelState,
    bessel_zero,
    dressed_states,
    evolve_exact,
    rwa_amplitudes,
    sideband_amplitude,
    spectroscopy_scan,
    transparency_scan,
)
from .errors import (
    CutoffLeakError,
    FluxQubitError,
    NoOscillationError,
    NumericError,
    ValidationError,
)
from .oscillator import (
    OscillatorParams,
    build_full_model,
    coexistence_experiment,
    dispersive_check,
    dispersive_transform,
    effective_evolve,
    effective_params,
    rabi_extract,
)
from .zeno import BathSpec, build_qubit_bath_model, decay_rate_scan, default_bath, evolve_open
