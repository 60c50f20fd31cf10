"""Adaptive Runge-Kutta propagation of the Schrodinger equation.

``i d psi / dt = H(t) psi`` with ``hbar = 1``.

Two routes share one contract (local error below ``tol``, output exactly on
the requested grid, no renormalization of the state):

* :class:`DrivenHamiltonian` inputs, ``H(t) = H_0 + sum_k cos(w_k t + p_k) H_k``,
  run through a compiled Dormand-Prince 8(5,3) stepper that integrates a whole
  batch of Hamiltonians in lockstep.
* Any other callable ``H(t)`` goes through ``scipy.integrate.solve_ivp`` with
  the same method.
"""

from __future__ import annotations

import numba
import numpy as np
from scipy.integrate import solve_ivp
from scipy.integrate._ivp import dop853_coefficients as _dop

from ..errors import StiffnessError, ValidationError
from .linalg import ASYMMETRY_TOL

_N_STAGES = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_N_STAGES, :_N_STAGES], dtype=np.float64)
_B = np.ascontiguousarray(_dop.B, dtype=np.float64)
_C = np.ascontiguousarray(_dop.C[:_N_STAGES], dtype=np.float64)
_E3 = np.ascontiguousarray(_dop.E3, dtype=np.float64)
_E5 = np.ascontiguousarray(_dop.E5, dtype=np.float64)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERROR_EXPONENT = -1.0 / 8.0


class DrivenHamiltonian:
    """``H(t) = static + sum_k cos(omega_k * t + phase_k) * op_k``.

    Every array may carry leading batch dimensions; all terms are broadcast
    to one common batch shape, so a single object can describe a whole grid
    of drive amplitudes or frequencies.

    Parameters
    ----------
    static : array_like, shape (..., D, D)
    drives : sequence of (op, omega, phase)
        ``op`` has shape ``(..., D, D)``; ``omega`` and ``phase`` are scalars
        or arrays of the batch shape. A ``sin`` drive is a ``cos`` drive
        with phase ``-pi/2``.
    """

    def __init__(self, static, drives=()):
        static = np.asarray(static, dtype=np.complex128)
        if static.ndim < 2 or static.shape[-1] != static.shape[-2]:
            raise ValidationError(f"static part must be (..., D, D), got {static.shape}")
        ops, omegas, phases = [], [], []
        for term in drives:
            op, omega, *rest = term
            phase = rest[0] if rest else 0.0
            ops.append(np.asarray(op, dtype=np.complex128))
            omegas.append(np.asarray(omega, dtype=np.float64))
            phases.append(np.asarray(phase, dtype=np.float64))

        batch = np.broadcast_shapes(
            static.shape[:-2],
            *(o.shape[:-2] for o in ops),
            *(w.shape for w in omegas),
            *(p.shape for p in phases),
        )
        dim = static.shape[-1]
        for o in ops:
            if o.shape[-2:] != (dim, dim):
                raise ValidationError("drive operators must match the static dimension")
        for m in [static, *ops]:
            _check_hermitian(m)

        self.batch_shape = batch
        self.dim = dim
        self.static = np.broadcast_to(static, batch + (dim, dim))
        self.ops = tuple(np.broadcast_to(o, batch + (dim, dim)) for o in ops)
        self.omegas = tuple(np.broadcast_to(w, batch) for w in omegas)
        self.phases = tuple(np.broadcast_to(p, batch) for p in phases)

    def __call__(self, t: float) -> np.ndarray:
        h = np.array(self.static)
        for op, w, p in zip(self.ops, self.omegas, self.phases):
            h = h + np.cos(w * t + p)[..., None, None] * op
        return h

    @property
    def n_drives(self) -> int:
        return len(self.ops)

    def max_frequency(self) -> float:
        """Largest drive angular frequency (0 for a static Hamiltonian)."""
        if not self.ops:
            return 0.0
        return float(max(np.max(np.abs(w)) for w in self.omegas))


def _check_hermitian(m: np.ndarray) -> None:
    diff = np.abs(m - np.swapaxes(m.conj(), -1, -2)).max(initial=0.0)
    scale = np.abs(m).max(initial=0.0)
    if diff > ASYMMETRY_TOL * max(scale, np.finfo(float).tiny) * m.shape[-1]:
        raise ValidationError(f"Hamiltonian term is not Hermitian (asymmetry {diff:.3e})")


@numba.njit(cache=True)
def _rhs(t, y, h0, hd, omega, phase, rows, cols, out):
    nb, d, m = y.shape
    nk = hd.shape[1]
    coef = np.empty(nk)
    for b in range(nb):
        for k in range(nk):
            coef[k] = np.cos(omega[b, k] * t + phase[b, k])
        for i in range(d):
            for c in range(m):
                out[b, i, c] = 0.0
        # Only the structural nonzeros of H_0 and the drive operators.
        for e in range(rows.shape[0]):
            i = rows[e]
            j = cols[e]
            hij = h0[b, i, j]
            for k in range(nk):
                hij += coef[k] * hd[b, k, i, j]
            for c in range(m):
                out[b, i, c] += hij * y[b, j, c]
        for i in range(d):
            for c in range(m):
                v = out[b, i, c]
                out[b, i, c] = complex(v.imag, -v.real)  # -1j * v


@numba.njit(cache=True)
def _dop853(h0, hd, omega, phase, rows, cols, y0, t_out, rtol, atol, max_step, first_step,
            max_steps, A, B, C, E3, E5):
    nb, d, m = y0.shape
    n_out = t_out.shape[0]
    n_st = B.shape[0]
    out = np.empty((nb, n_out, d, m), dtype=np.complex128)
    K = np.empty((n_st + 1, nb, d, m), dtype=np.complex128)
    y = y0.copy()
    y_new = np.empty_like(y)
    stage = np.empty_like(y)
    f_new = np.empty_like(y)

    t = t_out[0]
    out[:, 0] = y
    _rhs(t, y, h0, hd, omega, phase, rows, cols, K[0])
    h_prop = first_step
    n_steps = 0
    i_out = 1
    while i_out < n_out:
        target = t_out[i_out]
        if h_prop <= 1e-14 * max(abs(t), 1.0):
            return out, 1, t, n_steps
        h = min(h_prop, max_step)
        landing = False
        if t + h >= target:
            h = target - t
            landing = True
        n_steps += 1
        if n_steps > max_steps:
            return out, 2, t, n_steps

        for s in range(1, n_st):
            for b in range(nb):
                for i in range(d):
                    for c in range(m):
                        acc = 0.0 + 0.0j
                        for r in range(s):
                            a = A[s, r]
                            if a != 0.0:
                                acc += a * K[r, b, i, c]
                        stage[b, i, c] = y[b, i, c] + h * acc
            _rhs(t + C[s] * h, stage, h0, hd, omega, phase, rows, cols, K[s])
        for b in range(nb):
            for i in range(d):
                for c in range(m):
                    acc = 0.0 + 0.0j
                    for r in range(n_st):
                        acc += B[r] * K[r, b, i, c]
                    y_new[b, i, c] = y[b, i, c] + h * acc
        _rhs(t + h, y_new, h0, hd, omega, phase, rows, cols, f_new)
        K[n_st] = f_new

        err = 0.0
        n_comp = d * m
        for b in range(nb):
            e5 = 0.0
            e3 = 0.0
            for i in range(d):
                for c in range(m):
                    sc = atol + rtol * max(abs(y[b, i, c]), abs(y_new[b, i, c]))
                    a5 = 0.0 + 0.0j
                    a3 = 0.0 + 0.0j
                    for r in range(n_st + 1):
                        a5 += E5[r] * K[r, b, i, c]
                        a3 += E3[r] * K[r, b, i, c]
                    e5 += (abs(a5) / sc) ** 2
                    e3 += (abs(a3) / sc) ** 2
            if e5 > 0.0 or e3 > 0.0:
                nb_err = abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * n_comp)
                if nb_err > err:
                    err = nb_err

        if err < 1.0:
            t = target if landing else t + h
            y[:] = y_new
            K[0] = f_new
            if landing:
                out[:, i_out] = y
                i_out += 1
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, _SAFETY * err ** _ERROR_EXPONENT)
            proposal = h * factor
            # A step cut short to land on a sample must not shrink the stride.
            if not (landing and factor >= 1.0 and proposal < h_prop):
                h_prop = proposal
        else:
            h_prop = h * max(_MIN_FACTOR, _SAFETY * err ** _ERROR_EXPONENT)
    return out, 0, t, n_steps


def integrate_schrodinger(hamiltonian, psi0, t_grid, tol: float = 1e-10,
                          atol: float | None = None, max_step: float = np.inf,
                          max_steps: int = 50_000_000) -> np.ndarray:
    """Propagate ``psi0`` under ``H(t)`` and sample it on ``t_grid``.

    Parameters
    ----------
    hamiltonian : DrivenHamiltonian, ndarray or callable
        A :class:`DrivenHamiltonian` (possibly batched), a static matrix, or
        any callable returning the ``(D, D)`` Hermitian matrix at time ``t``.
    psi0 : array_like
        Shape ``(D,)`` or ``(D, M)`` (``M`` columns propagated together), or
        with the batch shape of ``hamiltonian`` prepended.
    t_grid : array_like
        Ascending sample times; integration starts at ``t_grid[0]``.
    tol : float
        Relative local error per step, at least ``1e-12``.
    atol : float, optional
        Absolute error floor; defaults to ``tol`` (states are normalized).
    max_step : float
        Upper bound on the step size.

    Returns
    -------
    ndarray
        Shape ``batch + (len(t_grid),) + state_shape``. The norm is *not*
        renormalized; its drift measures the integration error.

    Raises
    ------
    StiffnessError
        If the step size underflows or the step budget runs out.
    """
    if tol < 1e-12:
        raise ValidationError(f"tol must be >= 1e-12, got {tol}")
    atol = tol if atol is None else atol
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValidationError("t_grid must be a non-empty 1-D array")
    if np.any(np.diff(t_grid) <= 0):
        raise ValidationError("t_grid must be strictly ascending")

    if isinstance(hamiltonian, DrivenHamiltonian):
        return _integrate_driven(hamiltonian, psi0, t_grid, tol, atol, max_step, max_steps)
    if not callable(hamiltonian):
        return _integrate_driven(DrivenHamiltonian(hamiltonian), psi0, t_grid, tol, atol,
                                 max_step, max_steps)
    return _integrate_callable(hamiltonian, psi0, t_grid, tol, atol, max_step)


def _integrate_driven(ham, psi0, t_grid, tol, atol, max_step, max_steps):
    psi0 = np.asarray(psi0, dtype=np.complex128)
    batch, d = ham.batch_shape, ham.dim
    nbatch = len(batch)
    if psi0.shape[:nbatch] == batch and psi0.ndim > nbatch and psi0.shape[nbatch] == d:
        state_shape = psi0.shape[nbatch:]
    elif psi0.shape[0] == d and psi0.ndim <= 2:
        state_shape = psi0.shape
        psi0 = np.broadcast_to(psi0, batch + psi0.shape)
    else:
        raise ValidationError(f"psi0 shape {psi0.shape} incompatible with dimension {d}")
    columns = state_shape[1] if len(state_shape) == 2 else 1

    nb = int(np.prod(batch, dtype=int))
    y0 = np.ascontiguousarray(psi0.reshape(nb, d, columns))
    h0 = np.ascontiguousarray(ham.static.reshape(nb, d, d))
    nk = ham.n_drives
    if nk:
        hd = np.ascontiguousarray(np.stack([o.reshape(nb, d, d) for o in ham.ops], axis=1))
        om = np.ascontiguousarray(np.stack([w.reshape(nb) for w in ham.omegas], axis=1))
        ph = np.ascontiguousarray(np.stack([p.reshape(nb) for p in ham.phases], axis=1))
    else:
        hd = np.zeros((nb, 0, d, d), dtype=np.complex128)
        om = np.zeros((nb, 0))
        ph = np.zeros((nb, 0))

    scale = np.abs(h0).sum(axis=-1).max(initial=0.0)
    if nk:
        scale += np.abs(hd).sum(axis=-1).max(axis=-1).sum(axis=-1).max(initial=0.0)
    first = 0.01 / max(scale, 1e-300)
    span = t_grid[-1] - t_grid[0]
    if span > 0:
        first = min(first, span)
    first = min(first, max_step)

    mask = np.any(h0 != 0, axis=0)
    if nk:
        mask |= np.any(hd != 0, axis=(0, 1))
    rows, cols = (np.ascontiguousarray(a, dtype=np.int64) for a in np.nonzero(mask))
    out, status, t_fail, _ = _dop853(h0, hd, om, ph, rows, cols, y0, t_grid, tol, atol,
                                     float(max_step), float(first), int(max_steps),
                                     _A, _B, _C, _E3, _E5)
    if status == 1:
        raise StiffnessError("step size underflow", float(t_fail))
    if status == 2:
        raise StiffnessError("step budget exhausted", float(t_fail))
    out = out.reshape(batch + (t_grid.size, d, columns))
    if len(state_shape) == 1:
        out = out[..., 0]
    return out


def _integrate_callable(hamiltonian, psi0, t_grid, tol, atol, max_step):
    psi0 = np.asarray(psi0, dtype=np.complex128)
    shape = psi0.shape

    def rhs(t, y):
        return (-1j * (np.asarray(hamiltonian(t)) @ y.reshape(shape))).ravel()

    if t_grid.size == 1:
        return psi0[None].copy()
    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), psi0.ravel(), method="DOP853",
                    t_eval=t_grid, rtol=tol, atol=atol, max_step=max_step)
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else float(t_grid[0])
        raise StiffnessError(sol.message, t_fail)
    return sol.y.T.reshape((t_grid.size,) + shape)


def propagator(hamiltonian: DrivenHamiltonian, t_final: float, t_start: float = 0.0,
               tol: float = 1e-12, max_step: float = np.inf) -> np.ndarray:
    """Time-evolution operator ``U(t_final, t_start)``, batched like ``hamiltonian``."""
    d = hamiltonian.dim
    eye = np.eye(d, dtype=np.complex128)
    trace = integrate_schrodinger(hamiltonian, eye, [t_start, t_final], tol=tol,
                                  max_step=max_step)
    return trace[..., -1, :, :]


def quasienergies(hamiltonian: DrivenHamiltonian, period: float, tol: float = 1e-12,
                  max_step: float = np.inf) -> tuple[np.ndarray, np.ndarray]:
    """Floquet quasienergies in ``(-pi/T, pi/T]`` and Floquet states at ``t = 0``.

    Only valid for an unbatched Hamiltonian whose drives share the period
    ``period``.
    """
    if hamiltonian.batch_shape:
        raise ValidationError("quasienergies expects an unbatched Hamiltonian")
    u = propagator(hamiltonian, period, tol=tol, max_step=max_step)
    phases, vectors = np.linalg.eig(u)
    energies = -np.angle(phases) / period
    order = np.argsort(energies)
    return energies[order], vectors[:, order]


def norm_drift(trace: np.ndarray) -> float:
    """Largest deviation of the state norm from its initial value along a trace.

    ``trace`` has time on the first of the last two axes, i.e. ``(..., T, D)``.
    """
    norms = np.linalg.norm(trace, axis=-1)
    return float(np.abs(norms - norms[..., :1]).max())
