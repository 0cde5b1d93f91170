"""Pulse programs and their stroboscopic evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .core import Magnetization, SystemParams
from .propagators import (
    AffineMap,
    PulseSpec,
    cycle_map,
    exact_segment_map,
    free_evolution_map,
    lindblad_superoperator,
    pulse_map,
    rotation_map,
    rotation_superoperator,
)

__all__ = [
    "DEFAULT_CYCLES",
    "INITIAL_MZ_FACTOR",
    "PulseSequence",
    "StroboscopicSeries",
    "Trace",
    "protocol",
    "evolve",
    "full_cycle_map",
    "analytic_two_cycles",
    "first_order_two_cycles",
    "intra_cycle_trace",
]

DEFAULT_CYCLES = 200
#: Initial longitudinal magnetization, as a multiple of m_eq, used when no
#: ``init`` is given.
INITIAL_MZ_FACTOR = -0.9


@dataclass(frozen=True)
class PulseSequence:
    """Delay ``tau`` then ``pulse``, repeated ``cycles`` times.

    ``extra_pairs`` holds further ``(delay, pulse)`` pairs appended to each
    period, in order. ``unit`` records how times were expressed (``"t2"`` or
    ``"seconds"``); it does not rescale anything.
    """

    tau: float
    pulse: PulseSpec
    cycles: int = DEFAULT_CYCLES
    initial: Magnetization = field(default_factory=Magnetization)
    extra_pairs: tuple = ()
    unit: str = "t2"

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles}")
        if self.tau < 0 or any(d < 0 for d, _ in self.extra_pairs):
            raise ValueError("delays must be >= 0")
        if self.unit not in ("t2", "seconds"):
            raise ValueError(f"unknown unit {self.unit!r}")
        object.__setattr__(self, "extra_pairs", tuple(tuple(pr) for pr in self.extra_pairs))

    @property
    def pairs(self) -> tuple:
        return ((self.tau, self.pulse),) + self.extra_pairs

    @property
    def period(self) -> float:
        return sum(d + pl.duration for d, pl in self.pairs)

    def with_cycles(self, cycles: int) -> "PulseSequence":
        return PulseSequence(self.tau, self.pulse, cycles, self.initial, self.extra_pairs, self.unit)


def protocol(p: SystemParams, tau: float, delta: float = 0.0, cycles: int = DEFAULT_CYCLES,
             mz0: Optional[float] = None, axis: str = "y", unit: str = "t2") -> PulseSequence:
    """Single delay/pulse sequence starting from ``(0, 0, mz0)``.

    ``mz0`` defaults to ``-0.9 * p.m_eq``.
    """
    if mz0 is None:
        mz0 = INITIAL_MZ_FACTOR * p.m_eq
    return PulseSequence(
        tau=float(tau),
        pulse=PulseSpec.from_delta(delta, p.omega1, axis),
        cycles=cycles,
        initial=Magnetization(0.0, 0.0, float(mz0)),
        unit=unit,
    )


@dataclass(frozen=True, eq=False)
class StroboscopicSeries:
    """Magnetization sampled right after each full period, ``n = 0..N``."""

    n: np.ndarray
    t: np.ndarray
    m: np.ndarray
    params: SystemParams
    sequence: PulseSequence

    def __post_init__(self):
        for name in ("n", "t", "m"):
            getattr(self, name).setflags(write=False)

    @property
    def mx(self) -> np.ndarray:
        return self.m[:, 0]

    @property
    def my(self) -> np.ndarray:
        return self.m[:, 1]

    @property
    def mz(self) -> np.ndarray:
        return self.m[:, 2]

    def __len__(self) -> int:
        return len(self.n)

    def __getitem__(self, i):
        return int(self.n[i]), float(self.t[i]), Magnetization.from_array(self.m[i])

    def __iter__(self) -> Iterator:
        return (self[i] for i in range(len(self)))


def full_cycle_map(p: SystemParams, seq: PulseSequence,
                   dissipative_pulse: bool = False) -> AffineMap:
    out = AffineMap.identity()
    for delay, pulse in seq.pairs:
        out = cycle_map(p, delay, pulse, dissipative_pulse) @ out
    return out


def evolve(p: SystemParams, seq: PulseSequence, cycles: Optional[int] = None,
           dissipative_pulse: bool = False) -> StroboscopicSeries:
    """Apply the period map once per cycle, recording every sample.

    ``cycles`` overrides ``seq.cycles`` (0 is allowed and returns just the
    initial state).
    """
    n_cycles = seq.cycles if cycles is None else int(cycles)
    if n_cycles < 0:
        raise ValueError(f"cycles must be >= 0, got {n_cycles}")
    step = full_cycle_map(p, seq, dissipative_pulse)
    lin, off = step.linear, step.offset
    m = np.empty((n_cycles + 1, 3))
    m[0] = seq.initial.as_array()
    for k in range(n_cycles):
        m[k + 1] = lin @ m[k] + off
    n = np.arange(n_cycles + 1)
    return StroboscopicSeries(n=n, t=n * seq.period, m=m, params=p, sequence=seq)


def _decay_x(p: SystemParams, mx0: float, t: float) -> float:
    return mx0 * math.exp(-t / p.t2)


def _decay_z(p: SystemParams, mz0: float, t: float) -> float:
    e1 = math.exp(-t / p.t1)
    return p.m_eq * (1 - e1) + mz0 * e1


def analytic_two_cycles(p: SystemParams, tau: float, theta: float, mz0: float) -> dict:
    """Closed-form magnetization over two y-pulse cycles from ``(0, 0, mz0)``.

    Exact in ``theta``; returns ``mx``/``mz`` at ``tau``, ``T``, ``T + tau``
    and ``2T`` under keys like ``"mz_2T"``.
    """
    c, s = math.cos(theta), math.sin(theta)
    z_tau = _decay_z(p, mz0, tau)
    x_T, z_T = z_tau * s, z_tau * c
    x_Ttau = _decay_x(p, x_T, tau)
    z_Ttau = _decay_z(p, z_T, tau)
    return {
        "mx_tau": 0.0,
        "mz_tau": z_tau,
        "mx_T": x_T,
        "mz_T": z_T,
        "mx_T_tau": x_Ttau,
        "mz_T_tau": z_Ttau,
        "mx_2T": x_Ttau * c + z_Ttau * s,
        "mz_2T": z_Ttau * c - x_Ttau * s,
    }


def first_order_two_cycles(p: SystemParams, tau: float, delta: float, mz0: float) -> dict:
    """Two-cycle magnetization for ``theta = pi + delta`` kept to first order
    in the pulse error (the small-delta counterpart of
    :func:`analytic_two_cycles`)."""
    z_tau = _decay_z(p, mz0, tau)
    z_tau2 = _decay_z(p, -z_tau, tau)
    x_leak = _decay_x(p, -z_tau * delta, tau)
    return {
        "mx_T": -z_tau * delta,
        "mz_T": -z_tau,
        "mx_2T": -x_leak - z_tau2 * delta,
        "mz_2T": -z_tau2 + x_leak * delta,
    }


@dataclass(frozen=True, eq=False)
class Trace:
    """Densely sampled magnetization within cycles.

    ``segment`` is ``"start"``, ``"delay"`` or ``"pulse"`` for each sample.
    """

    t: np.ndarray
    m: np.ndarray
    cycle: np.ndarray
    segment: np.ndarray

    @property
    def mz(self) -> np.ndarray:
        return self.m[:, 2]


def _partial_pulse(p: SystemParams, pulse: PulseSpec, frac: float,
                   dissipative: bool) -> AffineMap:
    if frac == 1.0:
        return pulse_map(p, pulse, dissipative)
    part = PulseSpec.from_theta(pulse.theta * frac, p.omega1, pulse.axis)
    if not dissipative:
        return rotation_map(part)
    sign = 1.0 if pulse.theta >= 0 else -1.0
    gen = rotation_superoperator(sign * p.omega1, pulse.axis) + lindblad_superoperator(p)
    return exact_segment_map(gen, part.duration)


def intra_cycle_trace(p: SystemParams, seq: PulseSequence, samples_per_segment: int,
                      cycles: Optional[int] = None, dissipative_pulse: bool = False) -> Trace:
    """Sample each delay and pulse segment at ``samples_per_segment`` evenly
    spaced instants (the segment end included)."""
    k = int(samples_per_segment)
    if k < 1:
        raise ValueError("samples_per_segment must be >= 1")
    n_cycles = seq.cycles if cycles is None else int(cycles)
    fracs = [(j + 1) / k for j in range(k)]
    delay_maps = {d: [free_evolution_map(p, d * f) for f in fracs] for d, _ in seq.pairs}
    pulse_maps = [[_partial_pulse(p, pl, f, dissipative_pulse) for f in fracs]
                  for _, pl in seq.pairs]
    ts, ms, cyc, seg = [0.0], [seq.initial.as_array()], [0], ["start"]
    start = seq.initial.as_array()
    for n in range(n_cycles):
        t0 = n * seq.period
        cur = start
        for (delay, pulse), pmaps in zip(seq.pairs, pulse_maps):
            for f, mp in zip(fracs, delay_maps[delay]):
                ts.append(t0 + delay * f)
                ms.append(mp(cur))
                cyc.append(n)
                seg.append("delay")
            cur = ms[-1]
            t0 += delay
            for f, mp in zip(fracs, pmaps):
                ts.append(t0 + pulse.duration * f)
                ms.append(mp(cur))
                cyc.append(n)
                seg.append("pulse")
            cur = ms[-1]
            t0 += pulse.duration
        start = cur
    return Trace(np.array(ts), np.array(ms), np.array(cyc), np.array(seg))
