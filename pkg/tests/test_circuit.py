import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxqubit.circuit import (
    LOOP,
    THIRD_JUNCTION,
    CircuitParams,
    build_hamiltonian,
    diagonalize,
    flux_sweep,
    loop_current_matrix,
    parity_classification,
    sweep_rows,
    third_junction_current_matrix,
)
from fluxqubit.errors import ConsistencyError, DimensionError, ParityUndefinedError, ValidationError


def brute_force_energies(alpha, ej, f, n_cut, k):
    """Even-sector plane-wave Hamiltonian assembled term by term from the potential."""
    states = [(p, m) for p in range(-n_cut, n_cut + 1) for m in range(-n_cut, n_cut + 1)
              if (p + m) % 2 == 0]
    index = {s: i for i, s in enumerate(states)}
    h = np.zeros((len(states), len(states)), dtype=complex)
    for (p, m), i in index.items():
        h[i, i] = 2 * p * p + 2 * m * m / (1 + 2 * alpha) + ej * (2 + alpha)
        # -2 E_J cos(phi_p) cos(phi_m)
        for dp in (-1, 1):
            for dm in (-1, 1):
                j = index.get((p + dp, m + dm))
                if j is not None:
                    h[j, i] += -ej / 2
        # -alpha E_J cos(2 pi f + 2 phi_m)
        for dm, ph in ((2, np.exp(2j * math.pi * f)), (-2, np.exp(-2j * math.pi * f))):
            j = index.get((p, m + dm))
            if j is not None:
                h[j, i] += -alpha * ej / 2 * ph
    return np.linalg.eigvalsh(h)[:k]


@pytest.fixture(scope="module")
def optimal():
    return diagonalize(CircuitParams())


@pytest.mark.parametrize("f", [0.5, 0.47, 0.31])
def test_energies_match_brute_force(f):
    p = CircuitParams(f=f, truncation=8)
    r = diagonalize(p)
    np.testing.assert_allclose(r.energies, brute_force_energies(0.8, 40.0, f, 8, 5), atol=1e-9)


def test_known_spectrum_at_optimal_point(optimal):
    np.testing.assert_allclose(optimal.energies,
                               [66.7829, 67.1817, 74.1849, 77.8437, 79.6121], atol=1e-4)


@pytest.mark.parametrize("f,n_cut", [(0.5, 12), (0.49, 14)])
def test_truncation_convergence(f, n_cut):
    lo = diagonalize(CircuitParams(f=f, n_levels=3, truncation=n_cut)).energies
    hi = diagonalize(CircuitParams(f=f, n_levels=3, truncation=n_cut + 2)).energies
    assert np.all(np.abs(hi - lo) < 1e-8 * np.abs(lo))


def test_hamiltonian_real_at_half_and_complex_elsewhere():
    assert build_hamiltonian(CircuitParams()).is_real
    assert not build_hamiltonian(CircuitParams(f=0.49)).is_real


def test_loop_current_is_flux_derivative():
    """Hellmann-Feynman: dE_k/df = -(2 alpha + 1) 2 pi E_J I_kk for every level."""
    p = CircuitParams(f=0.48)
    h = 1e-6
    de = (diagonalize(p.with_flux(0.48 + h)).energies
          - diagonalize(p.with_flux(0.48 - h)).energies) / (2 * h)
    diag = np.diag(diagonalize(p).current_elements).real
    np.testing.assert_allclose(de, -(2 * 0.8 + 1) * 2 * math.pi * 40 * diag, rtol=1e-6)


def test_parity_alternates_at_optimal_point(optimal):
    assert optimal.parity == (1, -1, 1, -1, 1)
    assert parity_classification(optimal) == optimal.parity


def test_parity_undefined_off_half():
    r = diagonalize(CircuitParams(f=0.49))
    assert r.parity is None
    with pytest.raises(ParityUndefinedError):
        parity_classification(r)


def test_selection_rules_follow_parity(optimal):
    parity = np.array(optimal.parity)
    same = parity[:, None] == parity[None, :]
    m = optimal.current_elements
    assert np.abs(m[same]).max() < 1e-10
    assert np.abs(m[~same]).min() > 1e-6
    # The legacy operator depends on phi_m alone and has extra zeros (e.g. I_14),
    # but it never connects states of equal parity.
    assert np.abs(optimal.third_junction_elements[same]).max() < 1e-10


def test_legacy_pattern_matches_for_lowest_three(optimal):
    loop = np.abs(optimal.current_elements[:3, :3]) > 1e-8
    legacy = np.abs(optimal.third_junction_elements[:3, :3]) > 1e-8
    assert np.array_equal(loop, legacy)


def test_current_matrices_hermitian_and_known(optimal):
    m = optimal.current_elements
    np.testing.assert_allclose(m, m.conj().T, atol=1e-15)
    assert abs(m[0, 1]) == pytest.approx(0.2552, abs=1e-4)
    assert abs(m[1, 2]) == pytest.approx(0.0353, abs=1e-4)
    assert abs(optimal.third_junction_elements[0, 1]) == pytest.approx(0.664, abs=1e-3)


def test_matrix_elements_from_vectors_and_grids_agree(optimal):
    p = optimal.params
    a = loop_current_matrix(p, optimal)
    b = loop_current_matrix(p, optimal.vectors)
    c = loop_current_matrix(p, optimal.states)
    np.testing.assert_allclose(a, b, atol=1e-14)
    np.testing.assert_allclose(a, c, atol=1e-14)
    np.testing.assert_allclose(third_junction_current_matrix(p, optimal.states),
                               optimal.third_junction_elements, atol=1e-14)


def test_states_inconsistent_with_params_rejected(optimal):
    with pytest.raises(ConsistencyError):
        loop_current_matrix(CircuitParams(f=0.49), optimal)
    with pytest.raises(ConsistencyError):
        loop_current_matrix(CircuitParams(truncation=10), optimal.vectors)
    with pytest.raises(ConsistencyError):
        loop_current_matrix(optimal.params, 2 * optimal.vectors)


@settings(max_examples=8, deadline=None)
@given(d=st.floats(1e-3, 0.05))
def test_flux_reflection_symmetry(d):
    lo = diagonalize(CircuitParams(f=0.5 - d))
    hi = diagonalize(CircuitParams(f=0.5 + d))
    np.testing.assert_allclose(lo.energies, hi.energies, atol=1e-9)
    np.testing.assert_allclose(np.diag(lo.current_elements).real,
                               -np.diag(hi.current_elements).real, atol=1e-8)
    np.testing.assert_allclose(np.abs(lo.current_elements), np.abs(hi.current_elements),
                               atol=1e-8)


def test_sweep_phases_are_continuous():
    f = np.linspace(0.48, 0.52, 21)
    results = flux_sweep(CircuitParams(n_levels=3), f)
    i01 = np.array([r.current_elements[0, 1] for r in results])
    # No sign or phase jumps between neighbouring flux points.
    assert np.abs(np.angle(i01[1:] / i01[:-1])).max() < 1e-6
    overlaps = [abs(np.vdot(a.vectors[:, 0], b.vectors[:, 0]))
                for a, b in zip(results, results[1:])]
    phases = [np.angle(np.vdot(a.vectors[:, k], b.vectors[:, k]))
              for a, b in zip(results, results[1:]) for k in range(3)]
    assert min(overlaps) > 0.5
    assert np.abs(phases).max() < 1e-10


def test_sweep_rows_layout():
    results = flux_sweep(CircuitParams(n_levels=3), [0.49, 0.5])
    header, rows = sweep_rows(results, THIRD_JUNCTION)
    assert header[:4] == ["f", "E0", "E1", "E2"]
    assert header[-1] == "operator"
    assert len(header) == 1 + 3 + 2 * 6 + 1
    assert all(len(r) == len(header) and r[-1] == THIRD_JUNCTION for r in rows)
    with pytest.raises(ValidationError):
        sweep_rows(results, "bogus")
    with pytest.raises(ValidationError):
        flux_sweep(CircuitParams(), [1.2])


@pytest.mark.parametrize("kwargs,err", [
    ({"alpha": 1.2}, ValidationError),
    ({"ej_over_ec": -1.0}, ValidationError),
    ({"truncation": 2}, ValidationError),
    ({"truncation": 4, "n_levels": 30}, DimensionError),
])
def test_params_validation(kwargs, err):
    with pytest.raises(err):
        CircuitParams(**kwargs)
