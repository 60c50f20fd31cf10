"""Three-junction flux qubit in a truncated two-dimensional Fourier basis.

Plane waves ``exp(i (n_p phi_p + n_m phi_m))`` with ``|n_p|, |n_m| <= N``.
Every term of the Hamiltonian and of the loop-current operator shifts
``(n_p, n_m)`` by ``(+-1, +-1)`` or ``(0, +-2)``, so the parity of
``n_p + n_m`` is conserved. Only the even sector is kept: the odd one
belongs to phase variables that are not single valued on the circuit, and
including it would shadow every level with a spurious partner.

Energies are in units of the charging energy ``E_c`` and currents in
units of ``I_0 = 2 pi E_J / Phi_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import ConsistencyError, DimensionError, ParityUndefinedError, ValidationError
from .numerics.linalg import HermitianOperator, hermitian_eig

# Kinetic prefactors: 2 E_c n_p^2 + 2 E_c n_m^2 / (1 + 2 alpha).
KINETIC_P = 2.0
KINETIC_M_NUMERATOR = 2.0

OPTIMAL_POINT_TOL = 1e-12
PARITY_MIN = 0.99
DEGENERACY_TOL = 1e-10
LOOP = "loop"
THIRD_JUNCTION = "third-junction"


@dataclass(frozen=True)
class CircuitParams:
    """Circuit description.

    Parameters
    ----------
    alpha : float
        Ratio of the third junction's Josephson energy to the other two.
    ej_over_ec : float
        ``E_J / E_c``.
    f : float
        Reduced flux ``Phi_e / Phi_0``.
    truncation : int
        Fourier cutoff ``N``.
    n_levels : int
        Number of eigenpairs to compute.
    """

    alpha: float = 0.8
    ej_over_ec: float = 40.0
    f: float = 0.5
    truncation: int = 12
    n_levels: int = 5

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.ej_over_ec) and self.ej_over_ec > 0):
            raise ValidationError(f"ej_over_ec must be positive, got {self.ej_over_ec}")
        if not math.isfinite(self.f):
            raise ValidationError("f must be finite")
        if int(self.truncation) != self.truncation or self.truncation < 4:
            raise ValidationError(f"truncation must be an integer >= 4, got {self.truncation}")
        if int(self.n_levels) != self.n_levels or self.n_levels < 1:
            raise ValidationError(f"n_levels must be a positive integer, got {self.n_levels}")
        side = 2 * self.truncation + 1
        if self.n_levels > side * side / 4:
            raise DimensionError(
                f"truncation {self.truncation} hosts at most {side * side // 4} levels, "
                f"{self.n_levels} requested"
            )

    def with_flux(self, f: float) -> "CircuitParams":
        return replace(self, f=f)

    @property
    def at_optimal_point(self) -> bool:
        return abs(self.f - 0.5) <= OPTIMAL_POINT_TOL


class FourierBasis:
    """Index bookkeeping for the even ``n_p + n_m`` sector with cutoff ``N``."""

    def __init__(self, truncation: int):
        n = int(truncation)
        self.truncation = n
        grid = np.arange(-n, n + 1)
        npp, nmm = np.meshgrid(grid, grid, indexing="ij")
        keep = (npp + nmm) % 2 == 0
        self.n_p = npp[keep]
        self.n_m = nmm[keep]
        self.lookup = np.full((2 * n + 1, 2 * n + 1), -1, dtype=np.intp)
        self.lookup[self.n_p + n, self.n_m + n] = np.arange(self.n_p.size)

    @property
    def dimension(self) -> int:
        return self.n_p.size

    def shift(self, dp: int, dm: int) -> tuple[np.ndarray, np.ndarray]:
        """Pairs ``(target, source)`` with ``target = source + (dp, dm)`` inside the cutoff."""
        n = self.truncation
        tp, tm = self.n_p + dp, self.n_m + dm
        inside = (np.abs(tp) <= n) & (np.abs(tm) <= n)
        src = np.nonzero(inside)[0]
        return self.lookup[tp[inside] + n, tm[inside] + n], src

    def parity_permutation(self) -> np.ndarray:
        """Index of ``(-n_p, -n_m)`` for every basis state."""
        n = self.truncation
        return self.lookup[-self.n_p + n, -self.n_m + n]

    def to_grid(self, vectors: np.ndarray) -> np.ndarray:
        """Columns of ``vectors`` as ``(k, 2N+1, 2N+1)`` coefficient grids indexed by ``n + N``."""
        n = self.truncation
        k = vectors.shape[1]
        grid = np.zeros((k, 2 * n + 1, 2 * n + 1), dtype=np.complex128)
        grid[:, self.n_p + n, self.n_m + n] = vectors.T
        return grid

    def from_grid(self, grids: np.ndarray) -> np.ndarray:
        n = self.truncation
        return np.ascontiguousarray(grids[:, self.n_p + n, self.n_m + n].T)


def _basis(truncation: int) -> FourierBasis:
    return _BASIS_CACHE.setdefault(truncation, FourierBasis(truncation))


_BASIS_CACHE: dict[int, FourierBasis] = {}

# (dp, dm) shifts of sin(phi_p + phi_m) + sin(phi_p - phi_m) = 2 sin(phi_p) cos(phi_m).
_SIN_P_COS_M = ((1, 1, -0.5j), (-1, -1, 0.5j), (1, -1, -0.5j), (-1, 1, 0.5j))


def _operator(basis: FourierBasis, diagonal, terms) -> np.ndarray:
    dtype = np.complex128 if any(np.iscomplexobj(np.asarray(a)) and np.imag(a) != 0
                                 for _, _, a in terms) else np.float64
    m = np.zeros((basis.dimension, basis.dimension), dtype=dtype)
    if diagonal is not None:
        m[np.diag_indices(basis.dimension)] = diagonal
    for dp, dm, amp in terms:
        tgt, src = basis.shift(dp, dm)
        m[tgt, src] += amp.real if dtype == np.float64 else amp
    return m


def _flux_phase(f: float) -> complex:
    # Exact at the optimal point so the Hamiltonian stays real there.
    if abs(f - 0.5) <= OPTIMAL_POINT_TOL:
        return -1.0 + 0.0j
    return complex(np.exp(2j * np.pi * f))


def build_hamiltonian(params: CircuitParams) -> HermitianOperator:
    """Static circuit Hamiltonian in units of ``E_c``.

    ``H = 2 n_p^2 + 2 n_m^2 / (1 + 2 alpha) + 2 E_J + alpha E_J
    - 2 E_J cos(phi_p) cos(phi_m) - alpha E_J cos(2 pi f + 2 phi_m)``.

    Real symmetric at ``f = 1/2``, complex Hermitian otherwise.
    """
    basis = _basis(params.truncation)
    ej, a = params.ej_over_ec, params.alpha
    diag = (KINETIC_P * basis.n_p ** 2
            + KINETIC_M_NUMERATOR * basis.n_m ** 2 / (1.0 + 2.0 * a)
            + 2.0 * ej + a * ej)
    e = _flux_phase(params.f)
    terms = [(dp, dm, complex(-ej / 2.0)) for dp in (1, -1) for dm in (1, -1)]
    terms += [(0, 2, -a * ej / 2.0 * e), (0, -2, -a * ej / 2.0 * e.conjugate())]
    return HermitianOperator(_operator(basis, diag, terms))


def loop_current_operator(params: CircuitParams) -> HermitianOperator:
    """``(alpha / (2 alpha + 1)) [2 sin(phi_p) cos(phi_m) - sin(2 pi f + 2 phi_m)]``."""
    basis = _basis(params.truncation)
    a = params.alpha
    e = _flux_phase(params.f)
    pref = a / (2.0 * a + 1.0)
    terms = [(dp, dm, pref * amp) for dp, dm, amp in _SIN_P_COS_M]
    # sin(x) = (e^{ix} - e^{-ix}) / 2i
    terms += [(0, 2, -pref * e / 2j), (0, -2, pref * e.conjugate() / 2j)]
    return HermitianOperator(_operator(basis, None, terms))


def third_junction_operator(params: CircuitParams) -> HermitianOperator:
    """Supercurrent of the third junction alone, ``alpha sin(2 pi f + 2 phi_m)``."""
    basis = _basis(params.truncation)
    a = params.alpha
    e = _flux_phase(params.f)
    terms = [(0, 2, a * e / 2j), (0, -2, -a * e.conjugate() / 2j)]
    return HermitianOperator(_operator(basis, None, terms))


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Eigenpairs and current matrix elements at one flux point.

    Attributes
    ----------
    params : CircuitParams
    energies : ndarray, shape (k,)
        Ascending, in units of ``E_c``.
    vectors : ndarray, shape (D, k)
        Eigenvectors in the even-sector basis.
    current_elements : ndarray, shape (k, k)
        Loop-current matrix ``I_ij`` in units of ``I_0``.
    parity : tuple of {+1, -1, None} or None
        Parity labels, present only at ``f = 1/2``.
    """

    params: CircuitParams
    energies: np.ndarray
    vectors: np.ndarray
    current_elements: np.ndarray
    parity: tuple | None = None

    @property
    def f(self) -> float:
        return self.params.f

    @property
    def n_levels(self) -> int:
        return self.energies.size

    @cached_property
    def states(self) -> np.ndarray:
        """Fourier-coefficient grids, shape ``(k, 2N+1, 2N+1)``, indexed by ``(n_p + N, n_m + N)``."""
        return _basis(self.params.truncation).to_grid(self.vectors)

    @cached_property
    def third_junction_elements(self) -> np.ndarray:
        return third_junction_current_matrix(self.params, self)


def _gauge(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest coefficient real positive.

    Ties within ``1e-8`` relative (e.g. the ``+-n`` pair of a parity
    eigenstate) go to the lowest basis index, so the choice is stable.
    """
    out = vectors.astype(np.complex128, copy=True)
    mag = np.abs(out)
    for j in range(out.shape[1]):
        lead = int(np.argmax(mag[:, j] >= (1 - 1e-8) * mag[:, j].max()))
        c = out[lead, j]
        out[:, j] *= abs(c) / c
        out[lead, j] = abs(c)
    return out


def _parity_expectations(basis: FourierBasis, vectors: np.ndarray) -> np.ndarray:
    perm = basis.parity_permutation()
    return np.real(np.einsum("ij,ij->j", vectors.conj(), vectors[perm]))


def _order_degenerate(values, vectors, basis, at_optimal):
    """Deterministic order inside clusters closer than ``1e-10 E_c``."""
    k = values.size
    keys = np.arange(k, dtype=float)
    if at_optimal:
        secondary = -_parity_expectations(basis, vectors)
    else:
        secondary = np.argmax(np.abs(vectors), axis=0).astype(float)
    start = 0
    while start < k:
        stop = start + 1
        while stop < k and values[stop] - values[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            local = start + np.argsort(secondary[start:stop], kind="stable")
            keys[start:stop] = keys[local]
        start = stop
    order = keys.astype(int)
    return values[order], vectors[:, order]


def diagonalize(params: CircuitParams) -> SpectralResult:
    """Lowest ``params.n_levels`` eigenpairs with gauge-fixed eigenvectors.

    Raises
    ------
    NumericError
        If the eigensolver fails; the message reports the matrix dimension.
    """
    basis = _basis(params.truncation)
    values, vectors = hermitian_eig(build_hamiltonian(params), params.n_levels)
    vectors = _gauge(vectors)
    values, vectors = _order_degenerate(values, vectors, basis, params.at_optimal_point)
    current = _matrix_elements(loop_current_operator(params), vectors)
    result = SpectralResult(params, values, vectors, current)
    if params.at_optimal_point:
        result = replace(result, parity=_labels(basis, vectors))
    return result


def _labels(basis, vectors) -> tuple:
    expect = _parity_expectations(basis, vectors)
    return tuple((1 if e > 0 else -1) if abs(e) >= PARITY_MIN else None for e in expect)


def _matrix_elements(op: HermitianOperator, vectors: np.ndarray) -> np.ndarray:
    m = vectors.conj().T @ (op.matrix @ vectors)
    return 0.5 * (m + m.conj().T)


def _resolve_states(params: CircuitParams, states) -> np.ndarray:
    basis = _basis(params.truncation)
    if isinstance(states, SpectralResult):
        p = states.params
        if (p.alpha, p.ej_over_ec, p.f, p.truncation) != (
                params.alpha, params.ej_over_ec, params.f, params.truncation):
            raise ConsistencyError("states were computed for different circuit parameters")
        return states.vectors
    v = np.asarray(states, dtype=np.complex128)
    side = 2 * params.truncation + 1
    if v.ndim == 3 and v.shape[1:] == (side, side):
        v = basis.from_grid(v)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != basis.dimension:
        raise ConsistencyError(
            f"states of shape {np.shape(states)} do not match truncation {params.truncation} "
            f"(sector dimension {basis.dimension})"
        )
    norms = np.linalg.norm(v, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise ConsistencyError("states are not normalized")
    return v


def loop_current_matrix(params: CircuitParams, states) -> np.ndarray:
    """Loop-current matrix elements ``I_ij`` in units of ``I_0``.

    Parameters
    ----------
    params : CircuitParams
    states : SpectralResult, ndarray of shape (D, k), or grids of shape (k, 2N+1, 2N+1)

    Raises
    ------
    ConsistencyError
        If the states do not belong to ``params``.
    """
    return _matrix_elements(loop_current_operator(params), _resolve_states(params, states))


def third_junction_current_matrix(params: CircuitParams, states) -> np.ndarray:
    """Matrix elements of the single-junction current ``alpha sin(2 pi f + 2 phi_m)``."""
    return _matrix_elements(third_junction_operator(params), _resolve_states(params, states))


def parity_classification(result: SpectralResult) -> tuple:
    """Parity label of every state under ``(phi_p, phi_m) -> (-phi_p, -phi_m)``.

    Returns ``+1`` (even) or ``-1`` (odd) per state, or ``None`` when
    ``|<i|P|i>| < 0.99`` signals mixing of a near-degenerate pair.

    Raises
    ------
    ParityUndefinedError
        Away from ``f = 1/2``, where inversion symmetry is broken.
    """
    if not result.params.at_optimal_point:
        raise ParityUndefinedError(
            f"parity is defined only at f = 1/2, got f = {result.params.f!r}"
        )
    return _labels(_basis(result.params.truncation), result.vectors)


def parity_expectations(result: SpectralResult) -> np.ndarray:
    """``<i|P|i>`` for every state (meaningful near ``f = 1/2``)."""
    return _parity_expectations(_basis(result.params.truncation), result.vectors)


def flux_sweep(base: CircuitParams, f_values, n_levels: int | None = None) -> list[SpectralResult]:
    """Diagonalize at each flux with phases carried continuously along the sweep.

    The first point uses the largest-coefficient gauge. Each later
    eigenvector is multiplied by the phase that makes its overlap with the
    same level at the previous flux real and positive, so signed matrix
    elements vary smoothly with ``f``.
    """
    f_values = [float(f) for f in f_values]
    for f in f_values:
        if not 0.0 < f < 1.0:
            raise ValidationError(f"flux values must lie in (0, 1), got {f}")
    if n_levels is not None:
        base = replace(base, n_levels=n_levels)
    results: list[SpectralResult] = []
    prev = None
    for f in f_values:
        r = diagonalize(base.with_flux(f))
        if prev is not None:
            overlap = np.einsum("ij,ij->j", prev.conj(), r.vectors)
            phase = np.where(np.abs(overlap) > 0, overlap.conj() / np.abs(overlap), 1.0)
            vectors = r.vectors * phase
            current = _matrix_elements(loop_current_operator(r.params), vectors)
            r = replace(r, vectors=vectors, current_elements=current)
        prev = r.vectors
        results.append(r)
    return results


def sweep_rows(results: list[SpectralResult], operator: str = LOOP) -> tuple[list[str], list[list]]:
    """Header and rows of the flux-sweep table for one current operator.

    Columns: ``f, E0..E{n-1}, Re_I_ij, Im_I_ij`` for ``i <= j``, ``operator``.
    """
    if operator not in (LOOP, THIRD_JUNCTION):
        raise ValidationError(f"operator must be {LOOP!r} or {THIRD_JUNCTION!r}")
    if not results:
        return [], []
    n = results[0].n_levels
    header = ["f"] + [f"E{i}" for i in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    for i, j in pairs:
        header += [f"Re_I{i}{j}", f"Im_I{i}{j}"]
    header.append("operator")
    rows = []
    for r in results:
        m = r.current_elements if operator == LOOP else r.third_junction_elements
        row = [r.f, *r.energies]
        for i, j in pairs:
            row += [m[i, j].real, m[i, j].imag]
        row.append(operator)
        rows.append(row)
    return header, rows
