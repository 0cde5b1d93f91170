import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edtc.core import Magnetization, validate_params
from edtc.propagators import PulseSpec
from edtc.sequence import (
    PulseSequence,
    analytic_two_cycles,
    evolve,
    first_order_two_cycles,
    intra_cycle_trace,
    protocol,
)

from conftest import physical_params


def test_default_initial_state(fig1_params):
    seq = protocol(fig1_params, tau=10.0)
    assert seq.initial == Magnetization(0.0, 0.0, -0.9 * 0.8)
    assert seq.cycles == 200


def test_series_shape_and_times(fig1_params):
    seq = protocol(fig1_params, tau=10.0, cycles=50)
    s = evolve(fig1_params, seq)
    assert len(s) == 51
    np.testing.assert_array_equal(s.n, np.arange(51))
    np.testing.assert_allclose(s.t, s.n * (10.0 + math.pi / fig1_params.omega1))
    assert s[0][2] == seq.initial


def test_zero_cycles_is_initial_state(fig1_params):
    s = evolve(fig1_params, protocol(fig1_params, 10.0), cycles=0)
    assert len(s) == 1
    np.testing.assert_array_equal(s.m[0], [0, 0, -0.9 * 0.8])


def test_series_is_read_only(fig1_params):
    s = evolve(fig1_params, protocol(fig1_params, 10.0, cycles=5))
    with pytest.raises(ValueError):
        s.m[0, 0] = 1.0


def test_period_doubling_sign(fig1_params):
    mz = evolve(fig1_params, protocol(fig1_params, 10.0)).mz
    big = np.abs(mz) > 0.05
    signs = np.sign(mz)
    alternates = signs[1:] == -signs[:-1]
    assert np.all(alternates[big[1:] & big[:-1]])


@given(physical_params(), st.floats(0.0, 20.0), st.floats(-math.pi, math.pi),
       st.floats(-1.0, 1.0))
def test_evolve_matches_two_cycle_closed_form(p, tau, delta, mz0):
    seq = protocol(p, tau, delta, cycles=2, mz0=mz0)
    s = evolve(p, seq)
    ref = analytic_two_cycles(p, tau, math.pi + delta, mz0)
    np.testing.assert_allclose(s.m[1, [0, 2]], [ref["mx_T"], ref["mz_T"]], atol=1e-12)
    np.testing.assert_allclose(s.m[2, [0, 2]], [ref["mx_2T"], ref["mz_2T"]], atol=1e-12)
    assert s.m[2, 1] == 0.0


def test_first_order_error_is_quadratic():
    p = validate_params({"t1": 100.0, "t2": 1.0, "m_eq": 0.8})
    errs = []
    for delta in 0.2 / 2 ** np.arange(6):
        exact = analytic_two_cycles(p, 3.0, math.pi + delta, -0.72)
        approx = first_order_two_cycles(p, 3.0, delta, -0.72)
        errs.append(max(abs(exact[k] - approx[k]) for k in approx))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_trace_hits_stroboscopic_points(fig1_params):
    seq = protocol(fig1_params, 10.0, 0.2, cycles=6)
    strobe = evolve(fig1_params, seq)
    tr = intra_cycle_trace(fig1_params, seq, samples_per_segment=7)
    assert len(tr.t) == 1 + 6 * 2 * 7
    ends = tr.m[np.flatnonzero(tr.segment == "pulse")[6::7]]
    np.testing.assert_allclose(ends, strobe.m[1:], atol=1e-13)
    assert np.all(np.diff(tr.t) > 0)


def test_trace_delay_samples_relax(fig1_params):
    seq = protocol(fig1_params, 10.0, 0.0, cycles=1)
    tr = intra_cycle_trace(fig1_params, seq, samples_per_segment=10)
    delay = tr.mz[tr.segment == "delay"]
    expected = 0.8 + (-0.72 - 0.8) * np.exp(-tr.t[tr.segment == "delay"] / 100.0)
    np.testing.assert_allclose(delay, expected, atol=1e-14)


def test_extra_pairs_compose_in_order(fig1_params):
    a = PulseSpec.from_delta(0.0, fig1_params.omega1)
    b = PulseSpec.from_delta(-0.5 * math.pi, fig1_params.omega1)
    seq = PulseSequence(3.0, a, cycles=1, initial=Magnetization(0, 0, 1), extra_pairs=((0.0, b),))
    m = evolve(fig1_params, seq).m[-1]
    # after the flip mz < 0; a further +pi/2 rotation about y moves it onto -x
    assert m[0] < -0.9 and abs(m[2]) < 1e-12


def test_sequence_validation():
    pulse = PulseSpec.from_delta(0.0, 1.0)
    with pytest.raises(ValueError):
        PulseSequence(-1.0, pulse)
    with pytest.raises(ValueError):
        PulseSequence(1.0, pulse, cycles=0)
    with pytest.raises(ValueError):
        PulseSequence(1.0, pulse, unit="minutes")
