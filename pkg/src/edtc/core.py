"""Domain types shared across the package.

Conventions
-----------
* Times are plain floats in whatever unit the caller chose. Simulation
  recipes use units of T2 (so ``t2 == 1``) unless a sequence file says
  ``unit seconds``.
* Dynamics are always in the interaction picture of the Zeeman term, so the
  Larmor frequency never appears.
* Density matrices are vectorized row-major: ``(rho00, rho01, rho10, rho11)``
  with ``rho00`` the population of the ``mz = +1`` state.
* ``t_phi = math.inf`` means no pure dephasing (T2 = 2 T1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

__all__ = [
    "EDTCError",
    "NonPositiveTimescale",
    "InconsistentT2",
    "MagnetizationOutOfRange",
    "NonPhysicalState",
    "NegativeDuration",
    "DEFAULT_OMEGA1",
    "SystemParams",
    "Magnetization",
    "LiouvilleState",
    "AffineMap",
    "validate_params",
    "bloch_to_liouville",
    "liouville_to_bloch",
    "PAULI",
]

#: Drive amplitude used when none is given, in rad per unit time. With times
#: in units of T2 this makes a pi pulse last ~3e-3 T2.
DEFAULT_OMEGA1 = 1000.0

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_T2_RTOL = 1e-9


class EDTCError(Exception):
    """Base class for errors raised by this package."""


class NonPositiveTimescale(EDTCError, ValueError):
    pass


class InconsistentT2(EDTCError, ValueError):
    pass


class MagnetizationOutOfRange(EDTCError, ValueError):
    pass


class NonPhysicalState(EDTCError, ValueError):
    pass


class NegativeDuration(EDTCError, ValueError):
    pass


def _readonly(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Dissipation timescales, equilibrium magnetization and drive amplitude.

    Build instances with :func:`validate_params`; the constructor trusts its
    inputs so that validated values round-trip unchanged.
    """

    t1: float
    t2: float
    t_phi: float
    m_eq: float
    omega1: float = DEFAULT_OMEGA1

    @property
    def relaxation_rate(self) -> float:
        return 1.0 / self.t1

    @property
    def decoherence_rate(self) -> float:
        return 1.0 / self.t2

    @property
    def dephasing_rate(self) -> float:
        return 0.0 if math.isinf(self.t_phi) else 1.0 / self.t_phi

    def replace(self, **changes) -> "SystemParams":
        """Return re-validated params with some fields changed.

        Changing one of ``t1``/``t2``/``t_phi`` re-derives ``t_phi`` unless it
        was given explicitly, in which case ``t2`` is re-derived.
        """
        raw = {"t1": self.t1, "t2": self.t2, "m_eq": self.m_eq, "omega1": self.omega1}
        if "t_phi" in changes:
            raw.pop("t2")
        raw.update(changes)
        return validate_params(raw)


def validate_params(raw: Mapping[str, Optional[float]] | SystemParams) -> SystemParams:
    """Validate raw parameters and solve for the missing timescale.

    ``raw`` needs ``t1`` and at least one of ``t2``/``t_phi``; the other is
    filled from ``1/t2 = 1/(2 t1) + 1/t_phi``. ``m_eq`` defaults to 0 and
    ``omega1`` to :data:`DEFAULT_OMEGA1`. Passing a :class:`SystemParams`
    re-validates it and returns an equal object.
    """
    if isinstance(raw, SystemParams):
        raw = {"t1": raw.t1, "t2": raw.t2, "t_phi": raw.t_phi,
               "m_eq": raw.m_eq, "omega1": raw.omega1}

    def get(key):
        v = raw.get(key)
        return None if v is None else float(v)

    t1, t2, t_phi = get("t1"), get("t2"), get("t_phi")
    m_eq = get("m_eq")
    omega1 = get("omega1")
    m_eq = 0.0 if m_eq is None else m_eq
    omega1 = DEFAULT_OMEGA1 if omega1 is None else omega1

    if t1 is None:
        raise NonPositiveTimescale("t1 is required")
    if t2 is None and t_phi is None:
        raise InconsistentT2("at least one of t2 / t_phi must be given")
    for name, v in (("m_eq", m_eq), ("omega1", omega1), ("t1", t1), ("t2", t2)):
        if v is not None and not math.isfinite(v):
            raise NonPositiveTimescale(f"{name} must be finite, got {v}")
    if t_phi is not None and math.isnan(t_phi):
        raise NonPositiveTimescale("t_phi is NaN")
    for name, v in (("t1", t1), ("t2", t2), ("t_phi", t_phi), ("omega1", omega1)):
        if v is not None and v <= 0:
            raise NonPositiveTimescale(f"{name} must be > 0, got {v}")
    if abs(m_eq) > 1:
        raise MagnetizationOutOfRange(f"|m_eq| must be <= 1, got {m_eq}")

    dephasing = None if t_phi is None else (0.0 if math.isinf(t_phi) else 1.0 / t_phi)
    if t2 is None:
        t2 = 1.0 / (0.5 / t1 + dephasing)
    elif t_phi is None:
        dephasing = 1.0 / t2 - 0.5 / t1
        if dephasing < -_T2_RTOL / t2:
            raise InconsistentT2(f"t2={t2} exceeds 2*t1={2 * t1}")
        if dephasing <= _T2_RTOL / t2:
            t_phi = math.inf
            t2 = 2.0 * t1
        else:
            t_phi = 1.0 / dephasing
    else:
        expected = 0.5 / t1 + dephasing
        if abs(1.0 / t2 - expected) > _T2_RTOL * expected:
            raise InconsistentT2(
                f"1/t2={1 / t2!r} but 1/(2 t1) + 1/t_phi = {expected!r}")
    return SystemParams(t1=t1, t2=t2, t_phi=t_phi, m_eq=m_eq, omega1=omega1)


@dataclass(frozen=True)
class Magnetization:
    """Bloch vector ``(mx, my, mz)``."""

    mx: float = 0.0
    my: float = 0.0
    mz: float = 0.0

    @classmethod
    def from_array(cls, v) -> "Magnetization":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.mx, self.my, self.mz], dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.mx ** 2 + self.my ** 2 + self.mz ** 2)

    def check(self, atol: float = 1e-9) -> "Magnetization":
        if self.norm > 1 + atol:
            raise MagnetizationOutOfRange(f"|M| = {self.norm} > 1")
        return self


@dataclass(frozen=True)
class LiouvilleState:
    """Vectorized 2x2 density matrix, ordering ``(rho00, rho01, rho10, rho11)``."""

    vec: np.ndarray = field(repr=True)

    def __post_init__(self):
        v = _readonly(self.vec, complex).reshape(-1)
        if v.shape != (4,):
            raise ValueError(f"expected 4 components, got shape {v.shape}")
        object.__setattr__(self, "vec", v)

    @classmethod
    def from_matrix(cls, rho) -> "LiouvilleState":
        return cls(np.asarray(rho, dtype=complex).reshape(4))

    @property
    def matrix(self) -> np.ndarray:
        return self.vec.reshape(2, 2).copy()

    def violations(self, atol: float = 1e-12, pos_atol: float = 1e-10) -> list[str]:
        v = self.vec
        out = []
        if abs(v[0] + v[3] - 1) > atol:
            out.append(f"trace {v[0] + v[3]} != 1")
        if abs(v[2] - np.conj(v[1])) > atol or abs(v[0].imag) > atol or abs(v[3].imag) > atol:
            out.append("not Hermitian")
        else:
            rho = self.matrix
            evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
            if evals.min() < -pos_atol:
                out.append(f"negative eigenvalue {evals.min()}")
        return out

    def is_physical(self) -> bool:
        return not self.violations()


def bloch_to_liouville(m: Magnetization) -> LiouvilleState:
    """``rho = (I + mx sx + my sy + mz sz) / 2``, vectorized."""
    return LiouvilleState(np.array([
        0.5 * (1 + m.mz),
        0.5 * (m.mx - 1j * m.my),
        0.5 * (m.mx + 1j * m.my),
        0.5 * (1 - m.mz),
    ]))


def liouville_to_bloch(s: LiouvilleState) -> Magnetization:
    bad = s.violations()
    if bad:
        raise NonPhysicalState("; ".join(bad))
    v = s.vec
    return Magnetization(
        mx=float(2 * v[1].real),
        my=float(-2 * v[1].imag),
        mz=float((v[0] - v[3]).real),
    )


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``M -> linear @ M + offset`` acting on Bloch vectors.

    ``g @ f`` is the composition "f first, then g".
    """

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        lin = _readonly(self.linear)
        off = _readonly(self.offset)
        if lin.shape != (3, 3) or off.shape != (3,):
            raise ValueError("AffineMap needs a 3x3 linear part and a 3-vector offset")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(np.eye(3), np.zeros(3))

    def __call__(self, m):
        if isinstance(m, Magnetization):
            return Magnetization.from_array(self.linear @ m.as_array() + self.offset)
        return np.asarray(m, dtype=float) @ self.linear.T + self.offset

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        if not isinstance(other, AffineMap):
            return NotImplemented
        return AffineMap(self.linear @ other.linear, self.linear @ other.offset + self.offset)

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return bool(np.array_equal(self.linear, other.linear)
                    and np.array_equal(self.offset, other.offset))

    def allclose(self, other: "AffineMap", atol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= atol

    def max_abs_diff(self, other: "AffineMap") -> float:
        return float(max(np.abs(self.linear - other.linear).max(),
                         np.abs(self.offset - other.offset).max()))

    @property
    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.linear, 2))
