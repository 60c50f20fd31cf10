"""Longitudinally driven qubit decaying into a discrete bath.

With no transverse drive the excitation number is conserved, so a qubit
prepared in ``|e>`` with the bath in vacuum stays in the ``1 + M``
dimensional sector spanned by ``|e, vac>`` (index 0) and ``|g, 1_i>``
(index ``i``). The longitudinal drive phase-modulates the qubit and
splits each coupling ``g_i`` into sidebands ``g_i J_n(x)``; a bath centred
on ``omega_q + n omega_0`` only sees the n-th one, so the decay switches
off at the zeros of ``J_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .driven import DriveParams, bessel_zero
from .errors import NumericError, SectorError, ValidationError
from .numerics.integrate import DrivenHamiltonian, integrate_schrodinger
from .numerics.spectral import find_minima

NORM_TOL = 1e-9
STEPS_PER_PERIOD = 100

DEFAULT_MODES = 21
DEFAULT_WIDTH = 0.2
DEFAULT_HALF_LIFE_PERIODS = 50.0
DEFAULT_HORIZON_HALF_LIVES = 5.0


@dataclass(frozen=True)
class BathSpec:
    """Discrete environment.

    Parameters
    ----------
    modes : tuple of (omega_i, g_i)
        Mode angular frequencies (positive) and complex couplings.
    center, width : float
        Nominal centre and spread, for bookkeeping.
    """

    modes: tuple
    center: float
    width: float

    def __post_init__(self):
        if len(self.modes) == 0:
            raise ValidationError("bath needs at least one mode")
        for w, g in self.modes:
            if not (math.isfinite(w) and w > 0):
                raise ValidationError(f"mode frequencies must be positive, got {w}")
            if not np.isfinite(complex(g)):
                raise ValidationError("couplings must be finite")

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes], dtype=float)

    @property
    def couplings(self) -> np.ndarray:
        return np.array([g for _, g in self.modes], dtype=np.complex128)

    @property
    def size(self) -> int:
        return len(self.modes)

    def scaled(self, factor: float) -> "BathSpec":
        return replace(self, modes=tuple((w, g * factor) for w, g in self.modes))


def golden_rule_rate(bath: BathSpec) -> float:
    """Decay rate ``2 pi |g|^2 / delta_omega`` of an evenly spaced bath with equal couplings."""
    w = np.sort(bath.frequencies)
    if w.size < 2:
        raise ValidationError("golden-rule rate needs at least two modes")
    spacing = float(np.mean(np.diff(w)))
    return 2 * math.pi * float(np.mean(np.abs(bath.couplings) ** 2)) / spacing


def default_bath(p: DriveParams, n: int = 0, modes: int = DEFAULT_MODES,
                 width: float | None = None,
                 half_life_periods: float = DEFAULT_HALF_LIFE_PERIODS,
                 phase_seed: int | None = None) -> BathSpec:
    """Evenly spaced bath on the n-th sideband with golden-rule calibrated couplings.

    Modes cover ``omega_q + n omega_0 +- width / 2`` (``width`` defaults to
    ``0.2 omega_q``). Equal couplings give an undriven half-life of
    ``half_life_periods`` drive periods. They are real unless
    ``phase_seed`` is given, in which case each carries a uniformly random
    phase drawn from ``numpy.random.default_rng(phase_seed)``.
    """
    if modes < 2:
        raise ValidationError("default bath needs at least two modes")
    width = DEFAULT_WIDTH * p.omega_q if width is None else float(width)
    center = p.omega_q + n * p.omega_0
    w = np.linspace(center - width / 2, center + width / 2, modes)
    spacing = width / (modes - 1)
    rate = math.log(2.0) / (half_life_periods * p.period)
    g = math.sqrt(rate * spacing / (2 * math.pi))
    if phase_seed is None:
        gs = [g] * modes
    else:
        theta = np.random.default_rng(phase_seed).uniform(0.0, 2 * math.pi, modes)
        gs = [complex(g * np.exp(1j * t)) for t in theta]
    return BathSpec(tuple((float(wi), gi) for wi, gi in zip(w, gs)), center, width)


def baseline_half_life(bath: BathSpec) -> float:
    """Golden-rule half-life of the undriven qubit, ``ln 2 / Gamma``."""
    return math.log(2.0) / golden_rule_rate(bath)


@dataclass(frozen=True)
class QubitBathModel:
    """Single-excitation Hamiltonian of a driven qubit and its bath."""

    drive: DriveParams
    bath: BathSpec
    hamiltonian: DrivenHamiltonian

    @property
    def dimension(self) -> int:
        return self.hamiltonian.dim

    def max_step(self) -> float:
        """Step cap from the drive period and a bound on the level energies."""
        d = self.drive
        h0 = self.hamiltonian.static
        fastest = max(d.omega_0, float(np.abs(np.diagonal(h0)).max()) + abs(d.lambda_z)
                      + float(np.abs(self.bath.couplings).sum()))
        return 2 * math.pi / fastest / STEPS_PER_PERIOD


def _static(p: DriveParams, bath: BathSpec) -> tuple[np.ndarray, np.ndarray]:
    m = bath.size
    h0 = np.zeros((m + 1, m + 1), dtype=np.complex128)
    h0[0, 0] = p.omega_q / 2
    h0[np.arange(1, m + 1), np.arange(1, m + 1)] = -p.omega_q / 2 + bath.frequencies
    h0[0, 1:] = bath.couplings
    h0[1:, 0] = bath.couplings.conj()
    modulation = np.diag(np.r_[1.0, -np.ones(m)]).astype(np.complex128)
    return h0, modulation


def build_qubit_bath_model(p: DriveParams, bath: BathSpec) -> QubitBathModel:
    """Single-excitation model ``H_0 + lambda_z cos(omega_0 t) diag(+1, -1, ..., -1)``.

    Raises
    ------
    SectorError
        If ``lambda_x != 0``: the transverse drive does not conserve the
        excitation number, so the reduced sector is not closed. Evolve the
        full model instead.
    """
    if p.lambda_x != 0:
        raise SectorError(
            "lambda_x must be 0 for the single-excitation model; the transverse drive "
            "mixes excitation numbers and needs the full qubit-bath Hilbert space"
        )
    h0, mod = _static(p, bath)
    ham = DrivenHamiltonian(h0, [(p.lambda_z * mod, p.omega_0)])
    return QubitBathModel(p, bath, ham)


@dataclass(frozen=True)
class SectorTrace:
    """Single-excitation amplitudes ``(c_e, c_1..c_M)`` on ``t``."""

    t: np.ndarray
    amplitudes: np.ndarray

    @property
    def c_e(self) -> np.ndarray:
        return self.amplitudes[..., 0]

    @property
    def survival(self) -> np.ndarray:
        return np.abs(self.c_e) ** 2

    def norm_drift(self) -> float:
        norm = np.linalg.norm(self.amplitudes, axis=-1)
        return float(np.abs(norm - 1.0).max())


def _evolve_batch(models, t_grid, tol) -> SectorTrace:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0:
        raise ValidationError("t_grid must start at 0")
    models = list(models)
    dims = {m.dimension for m in models}
    if len(dims) != 1:
        raise ValidationError("batched models must share one dimension")
    d = dims.pop()
    h0 = np.stack([m.hamiltonian.static for m in models])
    ops = np.stack([m.hamiltonian.ops[0] for m in models])
    om = np.array([m.drive.omega_0 for m in models])
    ham = DrivenHamiltonian(h0, [(ops, om)])
    psi0 = np.zeros(d, dtype=np.complex128)
    psi0[0] = 1.0
    step = min(m.max_step() for m in models)
    amps = integrate_schrodinger(ham, psi0, t_grid, tol=tol, max_step=step)
    trace = SectorTrace(t_grid, amps)
    drift = trace.norm_drift()
    if drift > NORM_TOL:
        raise NumericError(f"norm drift {drift:.3e} exceeds {NORM_TOL:.0e}")
    return trace


def evolve_open(model: QubitBathModel, t_grid, tol: float = 1e-10) -> SectorTrace:
    """Exact evolution from ``|e, vac>``; ``.survival`` is ``|c_e(t)|^2``.

    Raises
    ------
    StiffnessError
        If the step size underflows.
    NumericError
        If the norm drifts by more than ``1e-9``.
    """
    tr = _evolve_batch([model], t_grid, tol)
    return SectorTrace(tr.t, tr.amplitudes[0])


def coherence(model: QubitBathModel, t_grid, c_g: complex, c_e: complex,
              tol: float = 1e-10) -> np.ndarray:
    """Off-diagonal element ``rho_eg(t)`` for the initial state ``c_g |g> + c_e |e>``.

    ``|g, vac>`` is uncoupled and only acquires the phase of the modulated
    level ``-omega_q / 2 - lambda_z cos(omega_0 t)``, so
    ``rho_eg(t) = c_e c_e_unit(t) conj(c_g exp(i phi_g(t)))``.
    """
    if abs(abs(c_g) ** 2 + abs(c_e) ** 2 - 1.0) > NORM_TOL:
        raise ValidationError("initial qubit state is not normalized")
    tr = evolve_open(model, t_grid, tol)
    d = model.drive
    t = tr.t
    phase_g = np.exp(1j * (d.omega_q * t / 2 + d.lambda_z * np.sin(d.omega_0 * t) / d.omega_0))
    return c_e * tr.c_e * np.conj(c_g * phase_g)


@dataclass(frozen=True)
class DecayScan:
    """Fixed-horizon decay ``1 - |c_e(T)|^2`` versus modulation index."""

    x: np.ndarray
    survival: np.ndarray
    horizon: float
    n: int
    minima: np.ndarray

    @property
    def decay(self) -> np.ndarray:
        return 1.0 - self.survival

    @property
    def minima_x(self) -> np.ndarray:
        return self.x[self.minima]

    def nearest_zero(self, x: float) -> float:
        """Bessel zero of ``J_n`` closest to ``x``."""
        zeros = [bessel_zero(abs(self.n), k) for k in range(1, 21)]
        return min(zeros, key=lambda z: abs(z - x))


def _stroboscopic_survival(models, horizon: float, tol: float) -> np.ndarray:
    """``|c_e(T)|^2`` from one-period propagators composed by matrix powers.

    The Hamiltonian has period ``tau = 2 pi / omega_0``, so with
    ``T = N tau + r`` the evolution operator is ``U(r) U(tau)^N``. Only one
    period is integrated, which keeps long horizons cheap.
    """
    models = list(models)
    tau = models[0].drive.period
    if any(not math.isclose(m.drive.period, tau, rel_tol=1e-15) for m in models):
        raise ValidationError("stroboscopic scan needs a common drive period")
    n_periods, rest = divmod(horizon, tau)
    times = sorted({0.0, rest, tau}) if rest > 1e-12 * tau else [0.0, tau]
    h0 = np.stack([m.hamiltonian.static for m in models])
    ops = np.stack([m.hamiltonian.ops[0] for m in models])
    om = np.array([m.drive.omega_0 for m in models])
    d = h0.shape[-1]
    u = integrate_schrodinger(DrivenHamiltonian(h0, [(ops, om)]), np.eye(d, dtype=np.complex128),
                              times, tol=tol, max_step=min(m.max_step() for m in models))
    u_period = u[:, -1]
    u_rest = u[:, 1] if len(times) == 3 else np.eye(d)[None]
    total = u_rest @ np.linalg.matrix_power(u_period, int(n_periods))
    column = total[..., :, 0]
    drift = float(np.abs(np.linalg.norm(column, axis=-1) - 1.0).max())
    if drift > NORM_TOL:
        raise NumericError(f"norm drift {drift:.3e} exceeds {NORM_TOL:.0e}")
    return np.abs(column[..., 0]) ** 2


def decay_rate_scan(p: DriveParams, bath: BathSpec, x_values, horizon: float,
                    n: int = 0, tol: float = 1e-10, method: str = "stroboscopic") -> DecayScan:
    """Decay metric on a grid of ``x = 2 lambda_z / omega_0`` at fixed ``omega_0``.

    Parameters
    ----------
    p : DriveParams
        ``lambda_x`` must be 0; ``lambda_z`` is overwritten per grid point.
    bath : BathSpec
        Should be centred on ``omega_q + n omega_0``.
    horizon : float
        Fixed time ``T`` at which the survival is read.
    n : int
        Sideband the bath selects (for reporting minima against ``J_n``).
    method : {"stroboscopic", "direct"}
        Compose one-period propagators, or integrate the whole horizon.
    """
    x = np.asarray(x_values, dtype=float)
    models = [build_qubit_bath_model(p.with_x(float(v)), bath) for v in x]
    if method == "stroboscopic":
        survival = _stroboscopic_survival(models, float(horizon), tol)
    elif method == "direct":
        survival = _evolve_batch(models, [0.0, horizon], tol).survival[:, -1]
    else:
        raise ValidationError(f"unknown method {method!r}")
    minima = find_minima(1.0 - survival)
    return DecayScan(x, survival, float(horizon), n, minima)
