"""Lindblad generators and segment propagators for the delay/pulse cycle.

Every propagator is reduced to an :class:`~edtc.core.AffineMap` on the Bloch
vector. Two independent routes exist for each segment:

* closed forms (:func:`free_evolution_map`, :func:`rotation_map`), and
* the matrix exponential of a 4x4 Liouville-space generator
  (:func:`exact_segment_map`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    PAULI,
    AffineMap,
    EDTCError,
    NegativeDuration,
    SystemParams,
)

__all__ = [
    "ExponentialNotConverged",
    "PulseSpec",
    "superoperator",
    "lindblad_superoperator",
    "rotation_superoperator",
    "liouville_expm",
    "free_evolution_map",
    "rotation_map",
    "exact_segment_map",
    "pulse_map",
    "cycle_map",
    "compose_n",
]

_SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
_SIGMA_MINUS = _SIGMA_PLUS.T.copy()
_I2 = np.eye(2, dtype=complex)

# Bloch components of rho are <sigma_i> = Tr(sigma_i rho) = vec(sigma_i^T) . vec(rho)
_READOUT = np.array([PAULI[k].T.reshape(4) for k in "xyz"])
_BLOCH_BASIS = [0.5 * PAULI[k].reshape(4) for k in "ixyz"]

# eigenbasis round-off grows like cond * eps; past this, use expm instead
_EIG_COND_MAX = 1e4


class ExponentialNotConverged(EDTCError, ArithmeticError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    """A hard rotation by ``theta = pi + delta`` about ``axis``.

    ``delta`` is the stored quantity; ``theta`` is derived so that the two
    never drift apart. ``duration`` is ``|theta| / omega1``.
    """

    axis: str
    delta: float
    duration: float

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"pulse axis must be 'x' or 'y', got {self.axis!r}")
        if self.duration < 0:
            raise NegativeDuration(f"pulse duration {self.duration} < 0")

    @property
    def theta(self) -> float:
        return math.pi + self.delta

    @classmethod
    def from_delta(cls, delta: float, omega1: float, axis: str = "y") -> "PulseSpec":
        return cls(axis=axis, delta=float(delta), duration=abs(math.pi + delta) / omega1)

    @classmethod
    def from_theta(cls, theta: float, omega1: float, axis: str = "y") -> "PulseSpec":
        return cls(axis=axis, delta=float(theta) - math.pi, duration=abs(theta) / omega1)


def superoperator(h=None, jumps=()) -> np.ndarray:
    """Row-major Liouvillian of ``-i[h, .] + sum_j D[L_j]``.

    With row-major vectorization ``vec(A rho B) = (A kron B^T) vec(rho)``.
    """
    gen = np.zeros((4, 4), dtype=complex)
    if h is not None:
        h = np.asarray(h, dtype=complex)
        gen += -1j * (np.kron(h, _I2) - np.kron(_I2, h.T))
    for op in jumps:
        op = np.asarray(op, dtype=complex)
        ldl = op.conj().T @ op
        gen += np.kron(op, op.conj())
        gen -= 0.5 * (np.kron(ldl, _I2) + np.kron(_I2, ldl.T))
    return gen


def lindblad_superoperator(p: SystemParams) -> np.ndarray:
    """Dissipative generator for the free delay (interaction picture, no Hamiltonian).

    Jump operators: ``sqrt((1+m_eq)/(2 t1)) s+``, ``sqrt((1-m_eq)/(2 t1)) s-``
    and ``sqrt(1/(2 t_phi)) sz``.
    """
    jumps = [
        math.sqrt((1 + p.m_eq) / (2 * p.t1)) * _SIGMA_PLUS,
        math.sqrt((1 - p.m_eq) / (2 * p.t1)) * _SIGMA_MINUS,
    ]
    if p.dephasing_rate > 0:
        jumps.append(math.sqrt(0.5 * p.dephasing_rate) * PAULI["z"])
    return superoperator(jumps=jumps)


def rotation_superoperator(omega1: float, axis: str = "y") -> np.ndarray:
    """Generator ``-i[H, .]`` with ``H = omega1 sigma_axis / 2``."""
    return superoperator(h=0.5 * omega1 * PAULI[axis])


def liouville_expm(gen: np.ndarray, t: float) -> np.ndarray:
    """``exp(gen * t)`` by eigendecomposition, falling back to Pade
    scaling-and-squaring when the eigenbasis is ill-conditioned."""
    a = np.asarray(gen, dtype=complex) * t
    if not np.all(np.isfinite(a)):
        raise ExponentialNotConverged("generator has non-finite entries")
    evals, vecs = np.linalg.eig(a)
    if np.linalg.cond(vecs) < _EIG_COND_MAX:
        out = (vecs * np.exp(evals)) @ np.linalg.inv(vecs)
    else:
        out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise ExponentialNotConverged(f"exp(L t) overflowed for t={t}")
    return out


def _to_affine(prop: np.ndarray) -> AffineMap:
    identity_part, *pauli_parts = (_READOUT @ prop @ b for b in _BLOCH_BASIS)
    offset = identity_part.real
    linear = np.column_stack([v.real for v in pauli_parts])
    return AffineMap(linear, offset)


def exact_segment_map(gen: np.ndarray, t: float) -> AffineMap:
    """Exponentiate a Liouville-space generator and restrict it to Bloch form."""
    if t < 0:
        raise NegativeDuration(f"segment duration {t} < 0")
    return _to_affine(liouville_expm(gen, t))


def free_evolution_map(p: SystemParams, t: float) -> AffineMap:
    """Closed-form Bloch relaxation over a delay of length ``t``."""
    if t < 0:
        raise NegativeDuration(f"delay {t} < 0")
    e2 = math.exp(-t / p.t2)
    e1 = math.exp(-t / p.t1)
    return AffineMap(np.diag([e2, e2, e1]), np.array([0.0, 0.0, p.m_eq * (1 - e1)]))


def rotation_map(pulse: PulseSpec) -> AffineMap:
    """Dissipation-free rotation by ``pulse.theta`` about the pulse axis."""
    # cos/sin of pi + delta, exact zeros for a perfect pi pulse
    c, s = -math.cos(pulse.delta), -math.sin(pulse.delta)
    if pulse.axis == "y":
        lin = [[c, 0, s], [0, 1, 0], [-s, 0, c]]
    else:
        lin = [[1, 0, 0], [0, c, -s], [0, s, c]]
    return AffineMap(np.array(lin), np.zeros(3))


def pulse_map(p: SystemParams, pulse: PulseSpec, dissipative: bool = False) -> AffineMap:
    if not dissipative:
        return rotation_map(pulse)
    sign = 1.0 if pulse.theta >= 0 else -1.0
    gen = rotation_superoperator(sign * p.omega1, pulse.axis) + lindblad_superoperator(p)
    return exact_segment_map(gen, pulse.duration)


def cycle_map(p: SystemParams, tau: float, pulse: PulseSpec,
              dissipative_pulse: bool = False) -> AffineMap:
    """One drive period: delay ``tau`` first, then the pulse.

    ``dissipative_pulse`` keeps relaxation switched on during the pulse; it
    exists to quantify the hard-pulse approximation and is off by default.
    """
    return pulse_map(p, pulse, dissipative_pulse) @ free_evolution_map(p, tau)


def compose_n(m: AffineMap, n: int) -> AffineMap:
    """``m`` applied ``n`` times, by binary exponentiation."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    result = AffineMap.identity()
    power = m
    while n:
        if n & 1:
            result = power @ result
        n >>= 1
        if n:
            power = power @ power
    return result
