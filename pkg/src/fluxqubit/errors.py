"""Exception hierarchy shared by every module of the package."""


class FluxQubitError(Exception):
    """Base class for all package errors."""


class ValidationError(FluxQubitError, ValueError):
    """Invalid parameters or inconsistent inputs."""


class DimensionError(ValidationError):
    """Basis truncation cannot host the requested number of levels."""


class ConsistencyError(ValidationError):
    """States and parameters do not belong together."""


class ParityUndefinedError(ValidationError):
    """Parity was requested away from the symmetric flux point."""


class NormalizationError(ValidationError):
    """An initial state is not normalized."""


class DegenerateError(ValidationError):
    """A transform or dressing is undefined because a splitting vanishes."""


class SectorError(ValidationError):
    """The model leaves the Hilbert-space sector it was built for."""


class DispersiveRegimeError(ValidationError):
    """Transverse coupling too strong for the dispersive expansion."""


class BesselRangeError(ValidationError):
    """Bessel order, argument, or zero index outside the supported envelope."""


class NumericError(FluxQubitError, ArithmeticError):
    """A numerical kernel failed to reach its accuracy contract."""


class StiffnessError(NumericError):
    """The adaptive integrator could not advance past time ``t``."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t!r})")
        self.t = t


class CutoffLeakError(NumericError):
    """Fock-space truncation is too small for the evolution."""

    def __init__(self, message: str, required_cutoff: int):
        super().__init__(f"{message}; increase fock_cutoff to at least {required_cutoff}")
        self.required_cutoff = required_cutoff


class NoOscillationError(NumericError):
    """No oscillation rises above the detection threshold."""
