"""Two-level system under simultaneous transverse and longitudinal drive.

``H(t) = w_q/2 sz + (l_x sx + l_z sz) cos(w_0 t)``, ``hbar = 1``.

The longitudinal term phase-modulates the qubit, so in the interaction
picture the transverse drive splits into sidebands weighted by Bessel
functions of ``x = 2 l_z / w_0``. The n-th sideband is resonant when
``w_q = (n + 1) w_0``.

Two transverse drive shapes are supported:

``"linear"``
    ``l_x sx cos(w_0 t)``. Both counter-propagating halves of the cosine
    feed the n-photon resonance, with stationary coupling
    ``(l_x / 2) (J_n(x) + J_{n+2}(x)) = l_x (n + 1) J_{n+1}(x) / x``.
``"rotating"``
    ``l_x (sx cos(w_0 t) + sy sin(w_0 t))``. Only one half is present and
    the coupling is ``l_x J_n(x)``, as returned by :func:`sideband_amplitude`.

Basis order is ``(|0>, |1>)`` with ``sz |1> = +|1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import (
    BesselRangeError,
    DegenerateError,
    DimensionError,
    NormalizationError,
    NumericError,
    ValidationError,
)
from .numerics.bessel import _besselj_wide, besselj
from .numerics.integrate import DrivenHamiltonian, integrate_schrodinger, quasienergies
from .numerics.spectral import find_minima, find_peaks

LINEAR = "linear"
ROTATING = "rotating"
NORM_TOL = 1e-9
MAX_ZERO_INDEX = 20
MAX_ZERO_ORDER = 60
STEPS_PER_PERIOD = 100

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]])
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class DriveParams:
    """Driven two-level system.

    Parameters
    ----------
    omega_q : float
        Qubit angular frequency.
    lambda_x, lambda_z : float
        Transverse and longitudinal drive amplitudes.
    omega_0 : float
        Drive angular frequency.
    transverse : {"linear", "rotating"}
        Shape of the transverse drive (see module notes).
    lambda_identity : float
        Drive term proportional to the identity. Reported for bookkeeping
        only; it is a global phase and never enters the dynamics.
    """

    omega_q: float
    lambda_x: float
    lambda_z: float
    omega_0: float
    transverse: str = LINEAR
    lambda_identity: float = 0.0

    def __post_init__(self):
        for name in ("omega_q", "lambda_x", "lambda_z", "omega_0", "lambda_identity"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.omega_q <= 0:
            raise ValidationError(f"omega_q must be positive, got {self.omega_q}")
        if self.omega_0 <= 0:
            raise ValidationError(f"omega_0 must be positive, got {self.omega_0}")
        if self.transverse not in (LINEAR, ROTATING):
            raise ValidationError(f"transverse must be {LINEAR!r} or {ROTATING!r}")

    @property
    def x(self) -> float:
        """Modulation index ``2 lambda_z / omega_0``."""
        return 2.0 * self.lambda_z / self.omega_0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_0

    def detuning(self, n: int) -> float:
        """``Delta_n = omega_q - (n + 1) omega_0``."""
        return self.omega_q - (n + 1) * self.omega_0

    def with_x(self, x: float) -> "DriveParams":
        return replace(self, lambda_z=0.5 * x * self.omega_0)


@dataclass(frozen=True)
class TwoLevelState:
    """``a |0> + b |1>``, normalized within ``1e-9``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")

    @classmethod
    def ground(cls) -> "TwoLevelState":
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> "TwoLevelState":
        return cls(0.0, 1.0)

    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=np.complex128)

    @property
    def excited_population(self) -> float:
        return abs(self.b) ** 2


@dataclass(frozen=True)
class TwoLevelTrace:
    """Amplitudes ``a(t), b(t)`` sampled on ``t``; leading batch axes allowed."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def excited_population(self) -> np.ndarray:
        return np.abs(self.b) ** 2

    @property
    def ground_population(self) -> np.ndarray:
        return np.abs(self.a) ** 2

    def norm_drift(self) -> float:
        norm = np.sqrt(np.abs(self.a) ** 2 + np.abs(self.b) ** 2)
        return float(np.abs(norm - 1.0).max())

    def state(self, i: int) -> TwoLevelState:
        return TwoLevelState(complex(self.a[..., i]), complex(self.b[..., i]))


def qubit_params_from_spectrum(spec, phi_amplitude: float, omega_0: float,
                               energy_unit: float = 1.0,
                               transverse: str = LINEAR) -> DriveParams:
    """Two-level drive parameters from the two lowest circuit levels.

    ``omega_q = (E_1 - E_0) * energy_unit``, ``lambda_x = Phi |I_01|``,
    ``lambda_z = Phi (I_11 - I_00) / 2``; the identity part
    ``Phi (I_11 + I_00) / 2`` is stored in ``lambda_identity``.

    Parameters
    ----------
    spec : SpectralResult
    phi_amplitude : float
        Flux amplitude, in units that turn ``Phi * I`` into an angular
        frequency on the same scale as ``energy_unit``.
    omega_0 : float
    energy_unit : float
        Angular frequency of one ``E_c``.
    """
    if spec.n_levels < 2:
        raise DimensionError("need at least two levels to define a qubit")
    i = spec.current_elements
    return DriveParams(
        omega_q=float(spec.energies[1] - spec.energies[0]) * energy_unit,
        lambda_x=phi_amplitude * abs(i[0, 1]),
        lambda_z=phi_amplitude * float((i[1, 1].real - i[0, 0].real) / 2.0),
        omega_0=omega_0,
        transverse=transverse,
        lambda_identity=phi_amplitude * float((i[1, 1].real + i[0, 0].real) / 2.0),
    )


def current_basis_to_qubit_basis(epsilon: float, delta: float, lam: float,
                                 omega_0: float, transverse: str = LINEAR) -> DriveParams:
    """Rewrite ``eps sz + Delta sx + lam sz cos(w_0 t)`` in the qubit eigenbasis.

    ``omega_q = 2 sqrt(eps^2 + Delta^2)``, ``lambda_z = lam eps / E``,
    ``lambda_x = -lam Delta / E`` with ``E = sqrt(eps^2 + Delta^2)``.
    """
    e = math.hypot(epsilon, delta)
    if e == 0.0:
        raise DegenerateError("epsilon and delta both vanish; the qubit basis is undefined")
    return DriveParams(2.0 * e, -lam * delta / e, lam * epsilon / e, omega_0, transverse)


def sideband_amplitude(n: int, p: DriveParams) -> float:
    """``lambda_n = lambda_x J_n(2 lambda_z / omega_0)``.

    Exact n-photon coupling for the rotating transverse drive.
    """
    return p.lambda_x * float(besselj(n, p.x))


def linear_sideband_amplitude(n: int, p: DriveParams) -> float:
    """n-photon coupling for the linear drive, ``(lambda_x / 2)(J_n(x) + J_{n+2}(x))``.

    Vanishes at the zeros of ``J_{n+1}`` (other than ``x = 0``), and equals
    ``lambda_x / 2`` for ``n = 0`` at ``x = 0``.
    """
    x = p.x
    return 0.5 * p.lambda_x * float(besselj(n, x) + besselj(n + 2, x))


def effective_sideband_amplitude(n: int, p: DriveParams) -> float:
    """Coupling of the n-photon resonance for the drive shape in ``p``."""
    if p.transverse == ROTATING:
        return sideband_amplitude(n, p)
    return linear_sideband_amplitude(n, p)


def rwa_amplitudes(p: DriveParams, n: int, a0: complex, b0: complex, t,
                   lambda_n: float | None = None) -> TwoLevelTrace:
    """Closed-form RWA solution on the n-photon resonance.

    ``Omega_n = sqrt(Delta_n^2 + 4 lambda_n^2)``, ``Delta_n = omega_q - (n+1) omega_0``::

        A(t) = {A0 [cos(W t/2) - i (D/W) sin(W t/2)] - i B0 (2 l/W) sin(W t/2)} exp(+i n w0 t / 2)
        B(t) = {B0 [cos(W t/2) + i (D/W) sin(W t/2)] - i A0 (2 l/W) sin(W t/2)} exp(-i n w0 t / 2)

    Parameters
    ----------
    lambda_n : float, optional
        Sideband coupling; defaults to :func:`sideband_amplitude`.

    Raises
    ------
    NormalizationError
        If ``|a0|^2 + |b0|^2`` differs from 1 by more than ``1e-9``.
    """
    TwoLevelState(a0, b0)
    lam = sideband_amplitude(n, p) if lambda_n is None else float(lambda_n)
    t = np.asarray(t, dtype=float)
    d = p.detuning(n)
    w = math.sqrt(d * d + 4.0 * lam * lam)
    if w == 0.0:
        a = np.full(t.shape, a0, dtype=np.complex128)
        b = np.full(t.shape, b0, dtype=np.complex128)
    else:
        c, s = np.cos(0.5 * w * t), np.sin(0.5 * w * t)
        a = a0 * (c - 1j * (d / w) * s) - 1j * b0 * (2 * lam / w) * s
        b = b0 * (c + 1j * (d / w) * s) - 1j * a0 * (2 * lam / w) * s
    phase = np.exp(0.5j * n * p.omega_0 * t)
    return TwoLevelTrace(t, a * phase, b * phase.conj())


def drive_hamiltonian(p: DriveParams) -> DrivenHamiltonian:
    """Time-dependent 2x2 Hamiltonian of ``p`` in the ``(|0>, |1>)`` basis."""
    return _batched_hamiltonian([p])


def _batched_hamiltonian(ps) -> DrivenHamiltonian:
    ps = list(ps)
    wq = np.array([q.omega_q for q in ps])
    lx = np.array([q.lambda_x for q in ps])
    lz = np.array([q.lambda_z for q in ps])
    w0 = np.array([q.omega_0 for q in ps])
    static = 0.5 * wq[:, None, None] * SIGMA_Z
    drive = lx[:, None, None] * SIGMA_X + lz[:, None, None] * SIGMA_Z
    kinds = {q.transverse for q in ps}
    if len(kinds) != 1:
        raise ValidationError("a batch must share one transverse drive shape")
    if kinds == {ROTATING}:
        terms = [(lz[:, None, None] * SIGMA_Z + lx[:, None, None] * SIGMA_X, w0, 0.0),
                 (lx[:, None, None] * SIGMA_Y, w0, -0.5 * math.pi)]
    else:
        terms = [(drive, w0, 0.0)]
    if len(ps) == 1:
        return DrivenHamiltonian(static[0], [(op[0], w[0], ph) for op, w, ph in terms])
    return DrivenHamiltonian(static, terms)


def evolve_exact(p, s0: TwoLevelState, t_grid, tol: float = 1e-10) -> TwoLevelTrace:
    """Integrate the driven two-level Schrodinger equation without RWA.

    Parameters
    ----------
    p : DriveParams or sequence of DriveParams
        A sequence is integrated as one batch; the trace then carries a
        leading batch axis.
    s0 : TwoLevelState
    t_grid : array_like
        Ascending times starting at 0.

    Raises
    ------
    StiffnessError
        If the step size underflows, with the time reached.
    NumericError
        If the norm drifts by more than ``1e-9``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0:
        raise ValidationError("t_grid must start at 0")
    batched = not isinstance(p, DriveParams)
    ps = list(p) if batched else [p]
    ham = _batched_hamiltonian(ps)
    # Step cap: a fixed fraction of the fastest of the drive period and the
    # largest instantaneous level splitting.
    fastest = max(max(q.omega_0, q.omega_q + 2 * (abs(q.lambda_x) + abs(q.lambda_z)))
                  for q in ps)
    psi = integrate_schrodinger(ham, s0.vector(), t_grid, tol=tol,
                                max_step=2 * math.pi / fastest / STEPS_PER_PERIOD)
    if batched and len(ps) == 1:
        psi = psi[None]
    trace = TwoLevelTrace(t_grid, psi[..., 0], psi[..., 1])
    drift = trace.norm_drift()
    if drift > NORM_TOL:
        raise NumericError(f"norm drift {drift:.3e} exceeds {NORM_TOL:.0e}")
    return trace


@dataclass(frozen=True)
class DressedBasis:
    """Dressed qubit states on the n-photon resonance, at ``t = 0``.

    Attributes
    ----------
    excited, ground : ndarray, shape (2,)
        Floquet states of the driven qubit in the ``(|0>, |1>)`` basis.
    omega_r : float
        Exact dressed splitting, the difference of their rotating-frame
        energies.
    """

    excited: np.ndarray
    ground: np.ndarray
    omega_r: float
    n: int


def _fold(e, period_omega):
    return (e + 0.5 * period_omega) % period_omega - 0.5 * period_omega


def dressed_states(p: DriveParams, n: int) -> DressedBasis:
    """Floquet states of the bare driven qubit labelled in the n-photon rotating frame.

    A Floquet state with quasienergy ``e`` has rotating-frame energy
    ``e - (n + 1) omega_0 / 2`` (mod ``omega_0``). The one with the larger
    folded value is the dressed excited state.
    """
    energies, vectors = quasienergies(drive_hamiltonian(p), p.period,
                                      max_step=p.period / STEPS_PER_PERIOD)
    rotating = _fold(energies - 0.5 * (n + 1) * p.omega_0, p.omega_0)
    hi, lo = (1, 0) if rotating[1] >= rotating[0] else (0, 1)
    vec = vectors / np.linalg.norm(vectors, axis=0)
    return DressedBasis(vec[:, hi], vec[:, lo], float(rotating[hi] - rotating[lo]), n)


def nearest_resonance(omega_q: float, omega_0: float, n_max: int = 10) -> int:
    """Sideband index ``n`` whose resonance ``omega_q / (n + 1)`` is closest to ``omega_0``."""
    n = np.arange(n_max + 1)
    return int(np.argmin(np.abs(omega_0 - omega_q / (n + 1))))


@dataclass(frozen=True)
class ScanResult:
    """Maximum excited population over a scanned parameter.

    Attributes
    ----------
    values : ndarray
        Scanned parameter (``omega_0`` or ``x``).
    max_population : ndarray
    extrema : ndarray of int
        Indices of detected peaks (spectroscopy) or minima (transparency).
    n : ndarray of int
        Sideband index attached to every grid point.
    """

    values: np.ndarray
    max_population: np.ndarray
    extrema: np.ndarray
    n: np.ndarray

    @property
    def locations(self) -> np.ndarray:
        return self.values[self.extrema]


def _max_population(ps, horizon: float, samples: int, tol: float) -> np.ndarray:
    t = np.linspace(0.0, horizon, samples)
    trace = evolve_exact(ps, TwoLevelState.ground(), t, tol=tol)
    return trace.excited_population.max(axis=-1)


def resonance_grid(omega_q: float, orders, half_width: float, points: int = 25) -> np.ndarray:
    """Drive frequencies clustered around ``omega_q / (n + 1)`` for each order ``n``.

    Each window spans ``+-half_width / (n + 1)`` with ``points`` samples, so
    the relative resolution is the same for every resonance.
    """
    if points < 3 or half_width <= 0:
        raise ValidationError("need points >= 3 and a positive half_width")
    windows = []
    for n in orders:
        c, hw = omega_q / (n + 1), half_width / (n + 1)
        windows.append(np.linspace(c - hw, c + hw, points))
    return np.unique(np.concatenate(windows))


def spectroscopy_scan(template: DriveParams, omega_0_values, horizon: float,
                      x: float | None = None, samples: int = 4001,
                      tol: float = 1e-10) -> ScanResult:
    """Resonance spectroscopy over the drive frequency.

    For every ``omega_0`` the qubit starts in ``|0>`` and the maximum of
    ``|b(t)|^2`` over ``0 <= t <= horizon`` is recorded.

    Parameters
    ----------
    template : DriveParams
        Supplies ``omega_q``, ``lambda_x`` and the drive shape.
    omega_0_values : array_like
    horizon : float
        Should cover at least one Rabi period of the weakest sideband.
    x : float, optional
        If given, ``lambda_z = x * omega_0 / 2`` at every point so the
        modulation index is fixed; otherwise ``template.lambda_z`` is used.
    samples : int
        Time samples over the horizon.
    """
    w0 = np.asarray(omega_0_values, dtype=float)
    ps = []
    for w in w0:
        q = replace(template, omega_0=float(w))
        ps.append(q.with_x(x) if x is not None else q)
    pop = _max_population(ps, horizon, samples, tol)
    n = np.array([nearest_resonance(template.omega_q, w) for w in w0], dtype=int)
    return ScanResult(w0, pop, find_peaks(pop), n)


def transparency_scan(n: int, template: DriveParams, x_values, horizon: float,
                      samples: int = 4001, tol: float = 1e-10) -> ScanResult:
    """Maximum absorption on the n-photon resonance versus modulation index.

    ``omega_0 = omega_q / (n + 1)`` is held fixed and ``lambda_z = x omega_0 / 2``.
    Minima with population below 0.5 are reported in ``extrema``.
    """
    x = np.asarray(x_values, dtype=float)
    base = replace(template, omega_0=template.omega_q / (n + 1))
    pop = _max_population([base.with_x(float(v)) for v in x], horizon, samples, tol)
    return ScanResult(x, pop, find_minima(pop, threshold=0.5), np.full(x.shape, n, dtype=int))


def nominal_rabi_period(p: DriveParams) -> float:
    """``pi / |lambda_x|``, the population period of a full-strength sideband."""
    if p.lambda_x == 0:
        raise DegenerateError("lambda_x = 0 has no Rabi period")
    return math.pi / abs(p.lambda_x)


@lru_cache(maxsize=None)
def bessel_zero(n: int, k: int) -> float:
    """k-th positive zero of ``J_n``, accurate to ``1e-10``.

    Sign changes are bracketed on a 0.05 grid starting at ``x = n`` (no
    zero lies below it) and refined by bisection.

    Raises
    ------
    BesselRangeError
        Unless ``0 <= n <= 60`` and ``1 <= k <= 20``.
    """
    if int(n) != n or not 0 <= n <= MAX_ZERO_ORDER:
        raise BesselRangeError(f"order must be an integer in [0, {MAX_ZERO_ORDER}], got {n}")
    if int(k) != k or not 1 <= k <= MAX_ZERO_INDEX:
        raise BesselRangeError(f"zero index must be an integer in [1, {MAX_ZERO_INDEX}], got {k}")
    n, k = int(n), int(k)
    step = 0.05
    lo = max(float(n), step)
    f_lo = _besselj_wide(n, lo)
    found = 0
    while True:
        hi = lo + step
        f_hi = _besselj_wide(n, hi)
        if f_lo == 0.0:
            found += 1
            if found == k:
                return lo
        elif f_lo * f_hi < 0:
            found += 1
            if found == k:
                break
        lo, f_lo = hi, f_hi
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        f_mid = _besselj_wide(n, mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)
