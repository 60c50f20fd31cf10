import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxqubit.circuit import CircuitParams, diagonalize
from fluxqubit.driven import (
    LINEAR,
    ROTATING,
    DriveParams,
    TwoLevelState,
    bessel_zero,
    current_basis_to_qubit_basis,
    dressed_states,
    effective_sideband_amplitude,
    evolve_exact,
    linear_sideband_amplitude,
    nearest_resonance,
    nominal_rabi_period,
    qubit_params_from_spectrum,
    resonance_grid,
    rwa_amplitudes,
    sideband_amplitude,
    spectroscopy_scan,
    transparency_scan,
)
from fluxqubit.errors import (
    BesselRangeError,
    DegenerateError,
    NormalizationError,
    ValidationError,
)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 6), x=st.floats(0.0, 20.0), lx=st.floats(-1.0, 1.0))
def test_sideband_amplitudes_match_scipy(n, x, lx):
    p = DriveParams(1.0, lx, 0.0, 0.5).with_x(x)
    assert sideband_amplitude(n, p) == pytest.approx(lx * scipy.special.jv(n, x), abs=1e-12)
    lin = 0.5 * lx * (scipy.special.jv(n, x) + scipy.special.jv(n + 2, x))
    assert linear_sideband_amplitude(n, p) == pytest.approx(lin, abs=1e-12)
    if x > 1e-3:
        # Bessel recurrence form of the same coupling
        alt = lx * (n + 1) * scipy.special.jv(n + 1, x) / x
        assert linear_sideband_amplitude(n, p) == pytest.approx(alt, abs=1e-10)


def test_effective_amplitude_follows_drive_shape():
    p = DriveParams(1.0, 0.02, 0.6, 1.0)
    assert effective_sideband_amplitude(1, p) == linear_sideband_amplitude(1, p)
    q = replace(p, transverse=ROTATING)
    assert effective_sideband_amplitude(1, q) == sideband_amplitude(1, q)


def test_drive_params_validation():
    with pytest.raises(ValidationError):
        DriveParams(-1.0, 0.1, 0.0, 1.0)
    with pytest.raises(ValidationError):
        DriveParams(1.0, 0.1, 0.0, 0.0)
    with pytest.raises(ValidationError):
        DriveParams(1.0, math.nan, 0.0, 1.0)
    with pytest.raises(ValidationError):
        DriveParams(1.0, 0.1, 0.0, 1.0, transverse="circular")
    p = DriveParams(1.0, 0.1, 0.0, 0.5).with_x(2.0)
    assert p.x == pytest.approx(2.0)
    assert p.detuning(1) == pytest.approx(0.0)


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0, math.pi), phi=st.floats(0, 2 * math.pi),
       n=st.integers(0, 3), x=st.floats(0, 5), delta=st.floats(-0.05, 0.05))
def test_rwa_amplitudes_preserve_norm(theta, phi, n, x, delta):
    p = DriveParams(1.0 + delta, 0.02, 0.0, 1.0 / (n + 1)).with_x(x)
    a0, b0 = math.cos(theta / 2), complex(math.sin(theta / 2) * np.exp(1j * phi))
    tr = rwa_amplitudes(p, n, a0, b0, np.linspace(0, 500, 51))
    assert tr.norm_drift() < 1e-12
    assert tr.a[0] == pytest.approx(a0) and tr.b[0] == pytest.approx(b0)


def test_rwa_amplitudes_resonant_rabi():
    p = DriveParams(1.0, 0.02, 0.0, 1.0)
    t = np.linspace(0, 400, 9)
    tr = rwa_amplitudes(p, 0, 1.0, 0.0, t)
    np.testing.assert_allclose(tr.excited_population, np.sin(0.02 * t) ** 2, atol=1e-14)


def test_rwa_rejects_unnormalized():
    p = DriveParams(1.0, 0.02, 0.0, 1.0)
    with pytest.raises(NormalizationError):
        rwa_amplitudes(p, 0, 1.0, 0.1, [0.0, 1.0])
    with pytest.raises(NormalizationError):
        TwoLevelState(0.5, 0.5)


def test_rotating_drive_without_modulation_is_exactly_rwa():
    p = DriveParams(1.0, 0.02, 0.0, 1.0, transverse=ROTATING)
    t = np.linspace(0, 300, 61)
    exact = evolve_exact(p, TwoLevelState.ground(), t)
    rwa = rwa_amplitudes(p, 0, 1.0, 0.0, t)
    np.testing.assert_allclose(np.abs(exact.b), np.abs(rwa.b), atol=1e-8)
    assert exact.norm_drift() < 1e-9


def test_linear_drive_close_to_rwa_at_weak_drive():
    p = DriveParams(1.0, 0.02, 0.0, 1.0, transverse=LINEAR)
    t = np.linspace(0, 300, 61)
    exact = evolve_exact(p, TwoLevelState.ground(), t)
    rwa = rwa_amplitudes(p, 0, 1.0, 0.0, t, lambda_n=linear_sideband_amplitude(0, p))
    # Bloch-Siegert corrections are of order lambda_x / omega_q
    assert np.abs(exact.excited_population - rwa.excited_population).max() < 0.02


def test_batched_evolution_matches_single():
    ps = [DriveParams(1.0, 0.02, 0.0, 0.5).with_x(x) for x in (0.5, 1.5)]
    t = np.linspace(0, 200, 5)
    batch = evolve_exact(ps, TwoLevelState.ground(), t)
    for i, p in enumerate(ps):
        one = evolve_exact(p, TwoLevelState.ground(), t)
        np.testing.assert_allclose(batch.b[i], one.b, atol=1e-9)
    assert evolve_exact(ps[:1], TwoLevelState.ground(), t).b.shape == (1, 5)


def test_evolve_exact_validation():
    p = DriveParams(1.0, 0.02, 0.0, 1.0)
    with pytest.raises(ValidationError):
        evolve_exact(p, TwoLevelState.ground(), [1.0, 2.0])
    with pytest.raises(ValidationError):
        evolve_exact([p, replace(p, transverse=ROTATING)], TwoLevelState.ground(), [0.0, 1.0])


def test_dressed_splitting_matches_coupling():
    p = DriveParams(1.0, 0.02, 0.0, 1.0, transverse=ROTATING)
    d = dressed_states(p, 0)
    assert d.omega_r == pytest.approx(2 * 0.02, rel=1e-6)
    assert abs(np.vdot(d.excited, d.ground)) < 1e-8
    q = DriveParams(1.0, 0.02, 0.75, 0.5, transverse=ROTATING)
    assert dressed_states(q, 1).omega_r == pytest.approx(2 * abs(sideband_amplitude(1, q)),
                                                         rel=0.02)


@pytest.mark.parametrize("n", [0, 1, 2, 7])
@pytest.mark.parametrize("k", [1, 2, 5, 20])
def test_bessel_zeros_match_scipy(n, k):
    assert bessel_zero(n, k) == pytest.approx(scipy.special.jn_zeros(n, k)[-1], abs=1e-10)


@pytest.mark.parametrize("n,k", [(-1, 1), (61, 1), (0, 0), (0, 21)])
def test_bessel_zero_range(n, k):
    with pytest.raises(BesselRangeError):
        bessel_zero(n, k)


def test_resonance_grid_windows():
    g = resonance_grid(1.0, [0, 1, 2], 0.012, points=25)
    assert np.all(np.diff(g) > 0)
    for n in range(3):
        assert np.min(np.abs(g - 1.0 / (n + 1))) < 1e-12
        inside = np.abs(g - 1.0 / (n + 1)) <= 0.012 / (n + 1) + 1e-15
        assert inside.sum() == 25
    with pytest.raises(ValidationError):
        resonance_grid(1.0, [0], -0.1)


def test_nearest_resonance():
    assert nearest_resonance(1.0, 0.98) == 0
    assert nearest_resonance(1.0, 0.51) == 1
    assert nearest_resonance(1.0, 0.26) == 3


def test_nominal_rabi_period():
    assert nominal_rabi_period(DriveParams(1.0, 0.02, 0.0, 1.0)) == pytest.approx(50 * math.pi)
    with pytest.raises(DegenerateError):
        nominal_rabi_period(DriveParams(1.0, 0.0, 0.0, 1.0))


def test_qubit_params_from_spectrum():
    spec = diagonalize(CircuitParams(f=0.49, n_levels=3))
    p = qubit_params_from_spectrum(spec, 0.1, 0.5)
    i = spec.current_elements
    assert p.omega_q == pytest.approx(spec.energies[1] - spec.energies[0])
    assert p.lambda_x == pytest.approx(0.1 * abs(i[0, 1]))
    assert p.lambda_z == pytest.approx(0.05 * (i[1, 1].real - i[0, 0].real))
    assert p.lambda_identity == pytest.approx(0.05 * (i[1, 1].real + i[0, 0].real))
    at_half = qubit_params_from_spectrum(diagonalize(CircuitParams(n_levels=3)), 0.1, 0.5)
    assert at_half.lambda_z == pytest.approx(0.0, abs=1e-9)


def test_current_basis_rotation():
    p = current_basis_to_qubit_basis(0.3, 0.4, 0.1, 1.0)
    assert p.omega_q == pytest.approx(1.0)
    assert p.lambda_z == pytest.approx(0.06)
    assert p.lambda_x == pytest.approx(-0.08)
    with pytest.raises(DegenerateError):
        current_basis_to_qubit_basis(0.0, 0.0, 0.1, 1.0)


def test_spectroscopy_finds_first_two_resonances():
    template = DriveParams(1.0, 0.05, 0.0, 1.0)
    grid = resonance_grid(1.0, [0, 1], 0.02, points=9)
    scan = spectroscopy_scan(template, grid, horizon=400.0, x=1.5, samples=801)
    loc = np.sort(scan.locations[scan.max_population[scan.extrema] > 0.9])
    np.testing.assert_allclose(loc, [0.5, 1.0], atol=0.005)


def test_transparency_minimum_near_bessel_zero():
    template = DriveParams(1.0, 0.05, 0.0, 1.0, transverse=ROTATING)
    x = np.linspace(2.0, 2.8, 9)
    scan = transparency_scan(0, template, x, horizon=200.0, samples=401)
    assert scan.locations.size == 1
    assert scan.locations[0] == pytest.approx(bessel_zero(0, 1), abs=0.1)
