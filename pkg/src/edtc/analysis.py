"""Subharmonic spectral analysis of the stroboscopic ``M_z(nT)`` series.

Frequencies are in cycles per drive period, so period doubling shows up at
``nu = 0.5``. All spectra use a rectangular window on the mean-removed
series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .core import EDTCError, SystemParams
from .sequence import StroboscopicSeries, evolve, protocol

__all__ = [
    "TooFewSamples",
    "FitNotConverged",
    "SpectralResult",
    "PowerLawFit",
    "MIN_SAMPLES",
    "default_pad",
    "spectrum",
    "crystalline_fraction",
    "peak_fwhm",
    "subharmonic_peaks",
    "fit_power_law",
    "power_law",
    "fwhm_vs_delta",
    "lifetime_vs_tau",
]

MIN_SAMPLES = 8


class TooFewSamples(EDTCError, ValueError):
    pass


class FitNotConverged(EDTCError, RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Zero-padded DFT of a mean-removed series.

    ``amp`` is the unnormalized transform, so ``power.sum() ==
    pad_to * (signal ** 2).sum()``. ``fwhm`` is ``None`` when no peak stands
    out near ``nu = 0.5``.
    """

    nu: np.ndarray
    amp: np.ndarray
    power: np.ndarray
    signal: np.ndarray
    f: float
    fwhm: Optional[float]
    peak_nu: Optional[float]
    halfwidth_bins: int = 1

    @property
    def pad_to(self) -> int:
        return len(self.nu)

    @property
    def n_samples(self) -> int:
        return len(self.signal)


def default_pad(n: int) -> int:
    """Eight times the next power of two at or above ``n``."""
    return 8 * (1 << max(0, int(n) - 1).bit_length())


def _as_signal(series) -> np.ndarray:
    if isinstance(series, StroboscopicSeries):
        return np.asarray(series.mz, dtype=float)
    return np.asarray(series, dtype=float).reshape(-1)


def spectrum(series, pad_to: Optional[int] = None, halfwidth_bins: int = 1) -> SpectralResult:
    """Spectrum of ``M_z(nT)`` with crystalline fraction and peak width.

    ``series`` is a :class:`StroboscopicSeries` or a 1-D array of ``M_z``
    samples.
    """
    x = _as_signal(series)
    n = len(x)
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {n}")
    if pad_to is None:
        pad_to = default_pad(n)
    if pad_to < n or pad_to & (pad_to - 1):
        raise ValueError(f"pad_to must be a power of two >= {n}, got {pad_to}")
    # mean removal leaves round-off on a flat series; keep it exactly zero
    x = np.zeros(n) if np.ptp(x) == 0 else x - x.mean()
    amp = np.fft.fft(x, pad_to)
    power = np.abs(amp) ** 2
    nu = np.arange(pad_to) / pad_to
    partial = SpectralResult(nu=nu, amp=amp, power=power, signal=x, f=0.0,
                             fwhm=None, peak_nu=None, halfwidth_bins=halfwidth_bins)
    width, peak = _peak_width(nu, power)
    for arr in (nu, amp, power, x):
        arr.setflags(write=False)
    return SpectralResult(nu=nu, amp=amp, power=power, signal=x,
                          f=crystalline_fraction(partial, halfwidth_bins),
                          fwhm=width, peak_nu=peak, halfwidth_bins=halfwidth_bins)


def crystalline_fraction(spec: SpectralResult, halfwidth_bins: int = 1) -> float:
    """Share of spectral power within ``halfwidth_bins`` of ``nu = 0.5``.

    Bins are those of the unpadded length-``n`` transform, placed so that
    one sits exactly on ``nu = 0.5`` (``nu_j = 0.5 + j/n``). These ``n``
    frequencies are orthogonal, so their total power is ``n * sum(x**2)``
    and the ratio lies in ``[0, 1]`` whatever ``n`` is and however much the
    spectrum was zero-padded.
    """
    x = spec.signal
    n = len(x)
    total = n * float(np.dot(x, x))
    if total == 0.0:
        return 0.0
    k = np.arange(n)
    j = np.arange(-halfwidth_bins, halfwidth_bins + 1)
    nus = 0.5 + j / n
    amps = np.exp(-2j * np.pi * np.outer(nus, k)) @ x
    f = float(np.sum(np.abs(amps) ** 2)) / total
    return min(1.0, max(0.0, f))


def _peak_width(nu: np.ndarray, power: np.ndarray):
    band = np.flatnonzero((nu >= 0.25) & (nu <= 0.75))
    k = band[np.argmax(power[band])]
    peak = power[k]
    if peak <= 0 or peak < 10 * np.median(power):
        return None, None
    half = 0.5 * peak

    i = k
    while i > 0 and power[i] > half:
        i -= 1
    j = k
    while j < len(power) - 1 and power[j] > half:
        j += 1
    if power[i] > half or power[j] > half:
        return None, float(nu[k])
    left = nu[i] + (half - power[i]) / (power[i + 1] - power[i]) * (nu[i + 1] - nu[i])
    right = nu[j - 1] + (half - power[j - 1]) / (power[j] - power[j - 1]) * (nu[j] - nu[j - 1])
    return float(right - left), float(nu[k])


def peak_fwhm(spec: SpectralResult) -> Optional[float]:
    """Full width at half maximum of the strongest peak in ``[0.25, 0.75]``.

    Half-power crossings are linearly interpolated between bins. Returns
    ``None`` if the peak is under ten times the median bin power.
    """
    return _peak_width(spec.nu, spec.power)[0]


def subharmonic_peaks(spec: SpectralResult, rel_height: float = 0.5) -> list[float]:
    """Frequencies of local maxima in ``[0.25, 0.75]`` above ``rel_height``
    times the strongest one."""
    band = (spec.nu >= 0.25) & (spec.nu <= 0.75)
    p = np.where(band, spec.power, 0.0)
    top = p.max()
    if top <= 0:
        return []
    idx, _ = find_peaks(p, height=rel_height * top)
    return [float(spec.nu[i]) for i in idx]


def power_law(d, a, lam, b):
    return a * np.power(d, lam) + b


@dataclass(frozen=True)
class PowerLawFit:
    """Result of fitting ``y = a * d**lam + b``."""

    a: float
    lam: float
    b: float
    residual: float
    covariance: np.ndarray = field(repr=False)
    iterations: int = 0
    converged_by: str = ""

    def __call__(self, d):
        return power_law(np.asarray(d, dtype=float), self.a, self.lam, self.b)

    def as_dict(self) -> dict:
        return {
            "a": self.a, "lambda": self.lam, "b": self.b, "residual": self.residual,
            "covariance": self.covariance.tolist(),
            "iterations": self.iterations, "converged_by": self.converged_by,
        }


def _initial_guess(d, y):
    b0 = float(y.min())
    excess = y - b0
    keep = excess > 0
    if keep.sum() >= 2:
        lam0, log_a0 = np.polyfit(np.log(d[keep]), np.log(excess[keep]), 1)
        return np.array([math.exp(log_a0), lam0, b0])
    return np.array([1.0, 2.0, b0])


def fit_power_law(points: Iterable[Sequence[float]], max_iter: int = 500,
                  gtol: float = 1e-10, xtol: float = 1e-14,
                  ftol: float = 1e-15) -> PowerLawFit:
    """Least-squares fit of ``y = a * d**lam + b`` by Levenberg-Marquardt.

    Starts from a log-log regression of ``y - min(y)`` against ``d`` with
    ``b = min(y)``. Stops when the gradient max-norm drops below ``gtol``,
    the relative step below ``xtol`` or the relative SSE decrease below
    ``ftol``.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise ValueError("need at least 4 (d, y) points")
    d, y = pts[:, 0], pts[:, 1]
    if np.any(d <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("d must be > 0 and all values finite")
    logd = np.log(d)

    def resid(x):
        return power_law(d, *x) - y

    def jac(x):
        dl = np.power(d, x[1])
        return np.column_stack([dl, x[0] * dl * logd, np.ones_like(d)])

    x = _initial_guess(d, y)
    r = resid(x)
    sse = float(r @ r)
    mu, grow = None, 2.0
    reason = ""
    it = 0
    for it in range(1, max_iter + 1):
        J = jac(x)
        g = J.T @ r
        if np.max(np.abs(g)) <= gtol:
            reason = "gtol"
            break
        A = J.T @ J
        diag = np.maximum(np.diag(A), 1e-300)
        if mu is None:
            mu = 1e-3
        while True:
            h = np.linalg.solve(A + mu * np.diag(diag), -g)
            x_new = x + h
            r_new = resid(x_new)
            sse_new = float(r_new @ r_new)
            if np.isfinite(sse_new) and sse_new <= sse:
                # SSE drop predicted by the linearized model |r + J h|^2
                predicted = -float(2 * h @ g + h @ A @ h)
                actual = sse - sse_new
                rho = actual / predicted if predicted > 0 else 0.0
                mu *= max(1 / 3, 1 - (2 * rho - 1) ** 3)
                grow = 2.0
                break
            mu *= grow
            grow *= 2
            if mu > 1e300:
                raise FitNotConverged("damping blew up", {"iterations": it, "params": x.tolist()})
        step_small = np.linalg.norm(h) <= xtol * (np.linalg.norm(x) + xtol)
        sse_flat = sse - sse_new <= ftol * sse
        x, r, sse = x_new, r_new, sse_new
        if step_small:
            reason = "xtol"
            break
        if sse_flat:
            reason = "ftol"
            break
    else:
        raise FitNotConverged(f"no convergence in {max_iter} iterations",
                              {"iterations": max_iter, "params": x.tolist(), "sse": sse})

    J = jac(x)
    dof = len(d) - 3
    s2 = sse / dof if dof > 0 else math.nan
    cov = s2 * np.linalg.pinv(J.T @ J)
    r = resid(x)
    return PowerLawFit(a=float(x[0]), lam=float(x[1]), b=float(x[2]),
                       residual=float(r @ r), covariance=cov,
                       iterations=it, converged_by=reason)


def fwhm_vs_delta(p: SystemParams, deltas: Sequence[float], tau: float, cycles: int,
                  mz0: Optional[float] = None, pad_to: Optional[int] = None) -> list:
    """``(delta, fwhm)`` for each pulse error, ``fwhm`` in cycles^-1."""
    out = []
    for delta in deltas:
        series = evolve(p, protocol(p, tau, delta, cycles, mz0))
        out.append((float(delta), spectrum(series, pad_to).fwhm))
    return out


def lifetime_vs_tau(p: SystemParams, delta: float, taus: Sequence[float], cycles: int,
                    mz0: Optional[float] = None, pad_to: Optional[int] = None,
                    units: str = "time") -> list:
    """``(tau, lifetime)`` pairs with ``lifetime = 1 / fwhm``.

    ``fwhm`` is measured in cycles^-1, so ``1/fwhm`` counts cycles; with
    ``units="time"`` (default) it is multiplied by the period ``T``. A
    missing peak gives ``nan``.
    """
    if units not in ("time", "cycles"):
        raise ValueError("units must be 'time' or 'cycles'")
    out = []
    for tau in taus:
        seq = protocol(p, tau, delta, cycles, mz0)
        width = spectrum(evolve(p, seq), pad_to).fwhm
        life = math.nan if width is None else 1.0 / width
        if units == "time":
            life *= seq.period
        out.append((float(tau), life))
    return out
