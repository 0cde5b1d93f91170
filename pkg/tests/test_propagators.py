import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

from edtc.core import AffineMap, Magnetization, NegativeDuration, bloch_to_liouville, validate_params
from edtc.propagators import (
    PulseSpec,
    compose_n,
    cycle_map,
    exact_segment_map,
    free_evolution_map,
    lindblad_superoperator,
    liouville_expm,
    pulse_map,
    rotation_map,
    rotation_superoperator,
    superoperator,
)

from conftest import bloch_vectors, physical_params


def bloch_ode(p, t_end, m0):
    """Bloch relaxation integrated numerically, used as an oracle."""
    def rhs(_, m):
        x, y, z = m
        return [-x / p.t2, -y / p.t2, (p.m_eq - z) / p.t1]
    sol = solve_ivp(rhs, (0, t_end), m0, method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[:, -1]


def test_generator_spectrum():
    p = validate_params({"t1": 37.0, "t2": 1.3, "m_eq": 0.4})
    ev = np.sort(np.linalg.eigvals(lindblad_superoperator(p)).real)
    np.testing.assert_allclose(ev, sorted([0, -1 / p.t1, -1 / p.t2, -1 / p.t2]), atol=1e-12)


def test_generator_preserves_trace():
    p = validate_params({"t1": 5.0, "t2": 2.0, "m_eq": -0.3})
    trace_row = np.array([1, 0, 0, 1])
    np.testing.assert_allclose(trace_row @ lindblad_superoperator(p), 0, atol=1e-14)


def test_stationary_state_is_equilibrium():
    p = validate_params({"t1": 5.0, "t2": 2.0, "m_eq": 0.6})
    rho = bloch_to_liouville(Magnetization(0, 0, 0.6)).vec
    np.testing.assert_allclose(lindblad_superoperator(p) @ rho, 0, atol=1e-14)


def test_superoperator_row_major_convention():
    # vec(A rho B) = (A kron B^T) vec(rho) with row-major vec
    rng = np.random.default_rng(0)
    h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = h + h.conj().T
    rho = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    expected = -1j * (h @ rho - rho @ h)
    np.testing.assert_allclose(superoperator(h) @ rho.reshape(4), expected.reshape(4))


@given(physical_params(), st.floats(0.0, 50.0))
def test_expm_matches_scipy(p, t):
    gen = lindblad_superoperator(p) + rotation_superoperator(3.0)
    np.testing.assert_allclose(liouville_expm(gen, t), expm(gen * t), atol=1e-10)


@given(physical_params(), st.floats(0.0, 20.0), bloch_vectors())
def test_free_evolution_against_ode(p, t, m0):
    got = free_evolution_map(p, t)(np.array(m0))
    np.testing.assert_allclose(got, bloch_ode(p, t, m0), atol=1e-9)


@given(physical_params(), st.floats(0.0, 5000.0))
def test_exact_segment_matches_closed_form(p, t):
    exact = exact_segment_map(lindblad_superoperator(p), t)
    assert exact.max_abs_diff(free_evolution_map(p, t)) <= 1e-9


def test_negative_duration_rejected():
    p = validate_params({"t1": 2, "t2": 1})
    with pytest.raises(NegativeDuration):
        free_evolution_map(p, -1.0)


@given(st.floats(-math.pi, math.pi), bloch_vectors())
def test_rotation_matches_scipy(delta, m0):
    pulse = PulseSpec.from_delta(delta, omega1=10.0, axis="y")
    expected = Rotation.from_rotvec([0, pulse.theta, 0]).apply(m0)
    np.testing.assert_allclose(rotation_map(pulse)(np.array(m0)), expected, atol=1e-14)


def test_pi_pulse_is_exact_flip():
    r = rotation_map(PulseSpec.from_delta(0.0, 1.0))
    np.testing.assert_array_equal(r.linear, np.diag([-1.0, 1.0, -1.0]))


@pytest.mark.parametrize("axis", ["x", "y"])
@given(theta=st.floats(0.1, 2 * math.pi))
def test_rotation_generator_agrees(axis, theta):
    omega1 = 5.0
    pulse = PulseSpec.from_theta(theta, omega1, axis)
    exact = exact_segment_map(rotation_superoperator(omega1, axis), pulse.duration)
    assert exact.max_abs_diff(rotation_map(pulse)) <= 1e-12


def test_pulse_duration():
    pulse = PulseSpec.from_delta(0.1 * math.pi, omega1=2.0)
    assert pulse.theta == pytest.approx(1.1 * math.pi)
    assert pulse.duration == pytest.approx(1.1 * math.pi / 2.0)


def test_dissipative_pulse_tends_to_ideal():
    p = validate_params({"t1": 100, "t2": 1, "m_eq": 0.8, "omega1": 1e6})
    pulse = PulseSpec.from_delta(0.2, p.omega1)
    assert pulse_map(p, pulse, dissipative=True).max_abs_diff(rotation_map(pulse)) < 1e-5


@given(physical_params(), st.floats(0.0, 30.0), st.floats(-1.0, 1.0))
def test_cycle_is_delay_then_pulse(p, tau, delta):
    pulse = PulseSpec.from_delta(delta, p.omega1)
    expected = rotation_map(pulse) @ free_evolution_map(p, tau)
    assert cycle_map(p, tau, pulse).max_abs_diff(expected) <= 1e-15


@given(st.integers(0, 300))
def test_compose_n_matches_iteration(n):
    p = validate_params({"t1": 50, "t2": 1, "m_eq": 0.8})
    step = cycle_map(p, 2.0, PulseSpec.from_delta(0.3, p.omega1))
    m = np.array([0.1, 0.0, -0.7])
    ref = m.copy()
    for _ in range(n):
        ref = step(ref)
    np.testing.assert_allclose(compose_n(step, n)(m), ref, atol=1e-12)


def test_compose_zero_is_identity():
    p = validate_params({"t1": 3, "t2": 1})
    assert compose_n(free_evolution_map(p, 1.0), 0) == AffineMap.identity()


@given(physical_params(), st.floats(0.0, 20.0), st.floats(-math.pi, math.pi), bloch_vectors())
def test_maps_keep_states_physical(p, tau, delta, m0):
    m = cycle_map(p, tau, PulseSpec.from_delta(delta, p.omega1))(np.array(m0))
    assert bloch_to_liouville(Magnetization(*m)).is_physical()
