import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
import scipy.special
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from fluxqubit.errors import BesselRangeError, NumericError, StiffnessError, ValidationError
from fluxqubit.numerics import (
    DrivenHamiltonian,
    HermitianOperator,
    besselj,
    dominant_frequency,
    find_peaks,
    hermitian_eig,
    integrate_schrodinger,
    norm_drift,
    propagator,
    quasienergies,
)
from fluxqubit.numerics.spectral import find_minima

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([-1.0, 1.0]).astype(complex)


# --- Bessel -------------------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 40, 60])
@pytest.mark.parametrize("x", [0.0, 1e-8, 0.3, 2.404825557695773, 5.99, 6.0, 12.0, 33.3, 60.0])
def test_besselj_matches_mpmath(n, x):
    want = float(mpmath.besselj(n, x))
    assert abs(besselj(n, x) - want) < 1e-12 * max(1.0, abs(want))


def test_besselj_vectorized_matches_scipy():
    x = np.linspace(-60, 60, 2001)
    for n in (-7, -1, 0, 3, 25):
        np.testing.assert_allclose(besselj(n, x), scipy.special.jv(n, x), atol=1e-12)


def test_besselj_negative_order_and_argument_symmetry():
    assert besselj(-3, 1.7) == pytest.approx(-besselj(3, 1.7), abs=1e-15)
    assert besselj(4, -2.2) == pytest.approx(besselj(4, 2.2), abs=1e-15)


@pytest.mark.parametrize("n,x", [(61, 1.0), (0, 60.5), (-61, 0.1)])
def test_besselj_range_errors(n, x):
    with pytest.raises(BesselRangeError):
        besselj(n, x)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 58), x=st.floats(0.05, 60.0))
def test_besselj_three_term_recurrence(n, x):
    lhs = besselj(n - 1, x) + besselj(n + 1, x)
    assert abs(lhs - 2 * n / x * besselj(n, x)) < 1e-11


# Orders |n| <= 60 exhaust both sums to below 1e-13 only for x <= 30.
@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.0, 30.0))
def test_besselj_sum_rules(x):
    orders = np.arange(1, 61)
    even = besselj(0, x) + 2 * sum(besselj(2 * k, x) for k in range(1, 31))
    squares = besselj(0, x) ** 2 + 2 * sum(besselj(int(k), x) ** 2 for k in orders)
    assert abs(even - 1.0) < 1e-11
    assert abs(squares - 1.0) < 1e-11


# --- eigensolver ----------------------------------------------------------------------


def test_hermitian_operator_rejects_asymmetric():
    with pytest.raises(ValidationError):
        HermitianOperator([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValidationError):
        HermitianOperator(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        HermitianOperator([[np.nan, 0], [0, 1]])


def test_hermitian_operator_keeps_real_storage():
    op = HermitianOperator(np.eye(3, dtype=complex))
    assert op.is_real
    assert not op.matrix.flags.writeable


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 40))
def test_hermitian_eig_matches_dense_solver(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = a + a.conj().T
    k = max(1, d // 2)
    values, vectors = hermitian_eig(HermitianOperator(h), k)
    np.testing.assert_allclose(values, np.linalg.eigvalsh(h)[:k], atol=1e-10 * np.linalg.norm(h))
    assert np.all(np.diff(values) >= 0)
    np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(k), atol=1e-12)
    residual = np.linalg.norm(h @ vectors - vectors * values, axis=0)
    assert residual.max() < 1e-10 * np.linalg.norm(h)


def test_hermitian_eig_bad_k():
    with pytest.raises(ValidationError):
        hermitian_eig(HermitianOperator(np.eye(3)), 4)


# --- integrator ----------------------------------------------------------------------


def test_static_evolution_matches_expm():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = a + a.conj().T
    psi0 = np.eye(5)[0].astype(complex)
    t = np.linspace(0, 3, 7)
    psi = integrate_schrodinger(h, psi0, t, tol=1e-12)
    for ti, p in zip(t, psi):
        np.testing.assert_allclose(p, scipy.linalg.expm(-1j * h * ti) @ psi0, atol=1e-9)


def test_driven_matches_solve_ivp():
    ham = DrivenHamiltonian(0.5 * SZ, [(0.3 * SX + 0.2 * SZ, 1.1)])
    t = np.linspace(0, 40, 11)
    psi = integrate_schrodinger(ham, [1, 0], t, tol=1e-12)

    def rhs(tt, y):
        return -1j * (ham(tt) @ y)

    ref = solve_ivp(rhs, (0, 40), np.array([1, 0], dtype=complex), t_eval=t, method="DOP853",
                    rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(psi, ref.y.T, atol=1e-9)


def test_callable_hamiltonian_path():
    ham = DrivenHamiltonian(0.5 * SZ, [(0.3 * SX, 1.0)])
    t = np.linspace(0, 10, 5)
    a = integrate_schrodinger(ham, [1, 0], t, tol=1e-12)
    b = integrate_schrodinger(ham.__call__, np.array([1, 0], dtype=complex), t, tol=1e-12)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_batched_equals_individual():
    amps = np.array([0.1, 0.3, 0.7])
    ops = amps[:, None, None] * SX
    ham = DrivenHamiltonian(0.5 * SZ, [(ops, 1.0)])
    t = np.linspace(0, 15, 4)
    batch = integrate_schrodinger(ham, [1, 0], t, tol=1e-12)
    assert batch.shape == (3, 4, 2)
    for i, a in enumerate(amps):
        single = integrate_schrodinger(DrivenHamiltonian(0.5 * SZ, [(a * SX, 1.0)]), [1, 0], t,
                                       tol=1e-12)
        np.testing.assert_allclose(batch[i], single, atol=1e-12)


def test_integrator_validation():
    with pytest.raises(ValidationError):
        integrate_schrodinger(SZ, [1, 0], [0, 1], tol=1e-13)
    with pytest.raises(ValidationError):
        integrate_schrodinger(SZ, [1, 0], [1, 0])
    with pytest.raises(ValidationError):
        DrivenHamiltonian(SZ, [(np.array([[0, 1], [0, 0]]), 1.0)])


def test_step_budget_raises_stiffness():
    with pytest.raises(StiffnessError):
        integrate_schrodinger(1e3 * SZ, [1, 1] / np.sqrt(2), [0, 100], max_steps=10)


def test_norm_drift_over_ten_thousand_periods():
    ham = DrivenHamiltonian(0.5 * SZ, [(0.02 * SX + 0.3 * SZ, 1.0)])
    period = 2 * math.pi
    t = np.linspace(0, 1e4 * period, 201)
    psi = integrate_schrodinger(ham, [1, 0], t, tol=1e-10, max_step=period / 100)
    assert norm_drift(psi) < 1e-9


def test_propagator_unitary_and_composes():
    ham = DrivenHamiltonian(0.5 * SZ, [(0.1 * SX, 0.9)])
    u1 = propagator(ham, 2.0)
    u2 = propagator(ham, 5.0, t_start=2.0)
    u = propagator(ham, 5.0)
    np.testing.assert_allclose(u1.conj().T @ u1, np.eye(2), atol=1e-10)
    np.testing.assert_allclose(u2 @ u1, u, atol=1e-9)


def test_quasienergies_of_static_hamiltonian():
    e, _ = quasienergies(DrivenHamiltonian(np.diag([0.1, -0.2])), 2 * math.pi)
    np.testing.assert_allclose(np.sort(e), [-0.2, 0.1], atol=1e-10)


# --- spectral helpers ---------------------------------------------------------------------


def test_find_peaks_strict_and_threshold():
    y = np.array([0, 0.6, 0.2, 0.1, 0.9, 0.9, 0.1, 0.3, 0.8, 0.2, 0])
    assert list(find_peaks(y)) == [1, 8]
    assert list(find_minima(-y, threshold=-0.5)) == [1, 8]
    assert find_peaks(np.zeros(5)).size == 0


@settings(max_examples=30, deadline=None)
@given(omega=st.floats(0.05, 2.5), phase=st.floats(0, 2 * math.pi), n=st.integers(200, 2000))
def test_dominant_frequency_recovers_sine(omega, phase, n):
    dt = 0.1
    assume(omega * n * dt >= 4 * math.pi)  # at least two cycles recorded
    t = np.arange(n) * dt
    est = dominant_frequency(np.cos(omega * t + phase), dt)
    assert est is not None and est.significant
    assert abs(est.omega - omega) <= est.uncertainty


def test_dominant_frequency_flat_and_short():
    assert dominant_frequency(np.ones(100), 0.1) is None
    assert dominant_frequency([1.0, 2.0], 0.1) is None
