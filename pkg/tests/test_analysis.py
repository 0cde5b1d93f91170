import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import curve_fit

from edtc.analysis import (
    FitNotConverged,
    TooFewSamples,
    crystalline_fraction,
    default_pad,
    fit_power_law,
    fwhm_vs_delta,
    lifetime_vs_tau,
    peak_fwhm,
    power_law,
    spectrum,
    subharmonic_peaks,
)
from edtc.core import validate_params
from edtc.sequence import evolve, protocol

signals = arrays(np.float64, st.integers(8, 80), elements=st.floats(-1, 1))


def direct_dft(x, pad):
    k = np.arange(len(x))
    return np.array([np.sum(x * np.exp(-2j * np.pi * m * k / pad)) for m in range(pad)])


@given(signals, st.integers(0, 3))
def test_spectrum_matches_direct_sum(x, extra):
    pad = (1 << (len(x) - 1).bit_length()) << extra
    spec = spectrum(x, pad_to=pad)
    np.testing.assert_allclose(spec.amp, direct_dft(x - x.mean(), pad), atol=1e-9)
    np.testing.assert_allclose(spec.nu, np.arange(pad) / pad)


@given(signals)
def test_parseval(x):
    spec = spectrum(x)
    assert spec.power.sum() == pytest.approx(spec.pad_to * np.sum(spec.signal ** 2), rel=1e-9,
                                             abs=1e-12)


@given(signals, st.integers(0, 4))
def test_fraction_bounded_and_pad_invariant(x, extra):
    a = spectrum(x)
    b = spectrum(x, pad_to=a.pad_to << extra)
    assert 0.0 <= a.f <= 1.0
    assert b.f == pytest.approx(a.f, abs=1e-12)


def test_default_pad():
    assert default_pad(201) == 8 * 256
    assert default_pad(256) == 8 * 256


def test_constant_series():
    spec = spectrum(np.full(50, 0.3))
    assert spec.f == 0.0
    assert spec.fwhm is None
    assert peak_fwhm(spec) is None


@pytest.mark.parametrize("n", [16, 64, 200])
def test_pure_alternation_is_fully_crystalline(n):
    assert spectrum((-1.0) ** np.arange(n)).f == pytest.approx(1.0, abs=1e-12)


def test_wider_window_never_smaller():
    x = np.cos(0.95 * np.pi * np.arange(100))
    fs = [crystalline_fraction(spectrum(x), hw) for hw in range(5)]
    assert all(b >= a - 1e-15 for a, b in zip(fs, fs[1:]))


def test_white_noise_fraction():
    n = 256
    fs = np.array([spectrum(np.random.default_rng(s).normal(size=n)).f for s in range(100)])
    # three orthogonal bins out of n, each carrying 1/n of the power on average
    sem = fs.std(ddof=1) / math.sqrt(len(fs))
    assert abs(fs.mean() - 3 / n) < 3 * sem + 1e-4


@pytest.mark.parametrize("a", [0.9, 0.97, 0.99])
def test_damped_alternation_width(a):
    n = 6000
    x = (-a) ** np.arange(n)
    spec = spectrum(x, pad_to=1 << 16)
    # |1 + a e^{-i w}|^-2 falls to half its peak at cos(2 pi g) = 1 - (1-a)^2 / (2a)
    gamma = math.acos(1 - (1 - a) ** 2 / (2 * a)) / (2 * math.pi)
    assert spec.fwhm == pytest.approx(2 * gamma, rel=2e-3)
    assert spec.peak_nu == pytest.approx(0.5, abs=1 / spec.pad_to)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        spectrum(np.ones(7))


def test_bad_pad():
    with pytest.raises(ValueError):
        spectrum(np.ones(20), pad_to=24)
    with pytest.raises(ValueError):
        spectrum(np.ones(20), pad_to=16)


def test_split_peaks():
    eps = 0.04
    x = np.cos(2 * np.pi * (0.5 - eps) * np.arange(400))
    peaks = subharmonic_peaks(spectrum(x))
    assert len(peaks) == 2
    assert peaks[0] == pytest.approx(0.5 - eps, abs=1e-3)
    assert peaks[1] == pytest.approx(0.5 + eps, abs=1e-3)


class TestPowerLaw:
    def test_noiseless_quadratic(self):
        d = np.linspace(0.05, 0.6, 12)
        fit = fit_power_law(zip(d, 3 * d ** 2 + 0.5))
        assert fit.lam == pytest.approx(2.0, abs=1e-6)
        assert fit.a == pytest.approx(3.0, abs=1e-5)
        assert fit.b == pytest.approx(0.5, abs=1e-6)
        assert fit.converged_by in ("gtol", "xtol", "ftol")

    @pytest.mark.parametrize("seed", range(5))
    def test_agrees_with_scipy(self, seed):
        rng = np.random.default_rng(seed)
        d = np.linspace(0.06, 0.63, 10)
        y = power_law(d, 0.18, 2.2, 0.002) * (1 + 0.03 * rng.normal(size=d.size))
        fit = fit_power_law(zip(d, y))
        ref, ref_cov = curve_fit(power_law, d, y, p0=[0.1, 2.0, 0.0], maxfev=20000)
        np.testing.assert_allclose([fit.a, fit.lam, fit.b], ref, rtol=1e-5, atol=1e-8)
        np.testing.assert_allclose(fit.covariance, ref_cov, rtol=1e-3, atol=1e-12)

    def test_callable_and_dict(self):
        d = np.array([1.0, 2.0, 3.0, 4.0])
        fit = fit_power_law(zip(d, d ** 1.5))
        np.testing.assert_allclose(fit(d), d ** 1.5, atol=1e-8)
        assert set(fit.as_dict()) >= {"a", "lambda", "b", "residual", "covariance"}

    def test_not_converged(self):
        rng = np.random.default_rng(1)
        d = np.linspace(0.1, 1, 8)
        y = d ** 2 + 0.1 * rng.normal(size=8)
        with pytest.raises(FitNotConverged) as info:
            fit_power_law(zip(d, y), max_iter=1, gtol=0, xtol=0, ftol=0)
        assert info.value.diagnostics["iterations"] == 1

    @pytest.mark.parametrize("pts", [
        [(1, 1), (2, 4), (3, 9)],
        [(0, 1), (1, 2), (2, 5), (3, 10)],
        [(1, 1), (2, np.nan), (3, 9), (4, 16)],
    ])
    def test_bad_input(self, pts):
        with pytest.raises(ValueError):
            fit_power_law(pts)


def test_fwhm_grows_with_error():
    p = validate_params({"t1": 1000, "t2": 1, "m_eq": 0.8})
    pts = fwhm_vs_delta(p, [0.05 * math.pi, 0.1 * math.pi, 0.2 * math.pi], 5.0, 1024)
    widths = [w for _, w in pts]
    assert widths[0] < widths[1] < widths[2]


def test_lifetime_units():
    p = validate_params({"t1": 1000, "t2": 1, "m_eq": 0.8})
    (tau, t_time), = lifetime_vs_tau(p, 0.1 * math.pi, [5.0], 1024)
    (_, t_cyc), = lifetime_vs_tau(p, 0.1 * math.pi, [5.0], 1024, units="cycles")
    period = protocol(p, 5.0, 0.1 * math.pi).period
    assert t_time == pytest.approx(t_cyc * period)
    with pytest.raises(ValueError):
        lifetime_vs_tau(p, 0.0, [5.0], 64, units="fortnights")


def test_spectrum_accepts_series(fig1_params):
    s = evolve(fig1_params, protocol(fig1_params, 10.0))
    assert spectrum(s).f == spectrum(s.mz).f
