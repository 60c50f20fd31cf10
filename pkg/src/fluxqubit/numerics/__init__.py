"""Shared numerical kernels: eigensolver, Bessel functions, integrator, spectral tools."""

from .bessel import besselj
from .integrate import (
    DrivenHamiltonian,
    integrate_schrodinger,
    norm_drift,
    propagator,
    quasienergies,
)
from .linalg import HermitianOperator, hermitian_eig
from .spectral import FrequencyEstimate, dominant_frequency, find_peaks

__all__ = [
    "DrivenHamiltonian",
    "FrequencyEstimate",
    "HermitianOperator",
    "besselj",
    "dominant_frequency",
    "find_peaks",
    "hermitian_eig",
    "integrate_schrodinger",
    "norm_drift",
    "propagator",
    "quasienergies",
]
