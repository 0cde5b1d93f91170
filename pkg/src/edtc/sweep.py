"""Phase-diagram sweeps of the crystalline fraction.

Each grid cell is an independent evolve + spectrum computation. Cells may run
in worker processes, but results are always placed by cell index, so the grid
is bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import spectrum
from .core import EDTCError, SystemParams, validate_params
from .sequence import DEFAULT_CYCLES, INITIAL_MZ_FACTOR, evolve, protocol

__all__ = [
    "AXES",
    "PhaseDiagram",
    "cell_fraction",
    "run_cells",
    "sweep",
    "sweep_delta_ratio",
    "sweep_delta_tau",
]

#: Sweepable quantities. ``tau`` and ``t1_over_t2`` are in units of T2.
AXES = ("delta", "tau", "t1_over_t2")


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """Crystalline fraction on a ``len(y_values) x len(x_values)`` grid.

    Failed cells hold ``nan`` in ``f_grid`` and a message in ``errors``
    keyed by ``(row, col)``.
    """

    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    f_grid: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def success_fraction(self) -> float:
        return 1.0 - len(self.errors) / self.f_grid.size

    def at(self, x: float, y: float) -> float:
        """Value at the grid point nearest to ``(x, y)``."""
        i = int(np.argmin(np.abs(self.y_values - y)))
        j = int(np.argmin(np.abs(self.x_values - x)))
        return float(self.f_grid[i, j])


def cell_fraction(cell: dict) -> tuple[Optional[float], Optional[str]]:
    """Crystalline fraction for one fully specified cell.

    Returns ``(f, None)`` or ``(None, message)``; never raises for bad
    physical parameters so a sweep can carry on past them.
    """
    try:
        t2 = cell["t2"]
        p = validate_params({"t1": cell["t1_over_t2"] * t2, "t2": t2,
                             "m_eq": cell["m_eq"], "omega1": cell["omega1"]})
        seq = protocol(p, cell["tau"] * t2, cell["delta"], cell["cycles"],
                       cell["mz0_factor"] * p.m_eq)
        spec = spectrum(evolve(p, seq), halfwidth_bins=cell["halfwidth_bins"])
        return spec.f, None
    except (EDTCError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        jobs = int(os.environ.get("EDTC_JOBS", "1"))
    return max(1, int(jobs))


def run_cells(fn: Callable, cells: Sequence, jobs: Optional[int] = None) -> list:
    """``[fn(c) for c in cells]``, optionally spread over processes.

    ``jobs=None`` reads ``EDTC_JOBS`` (default 1). Output order always
    matches ``cells``.
    """
    jobs = _resolve_jobs(jobs)
    if jobs == 1 or len(cells) < 2:
        return [fn(c) for c in cells]
    chunk = max(1, math.ceil(len(cells) / (4 * jobs)))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells, chunksize=chunk))


def sweep(base: SystemParams, x_name: str, x_values: Sequence[float],
          y_name: str, y_values: Sequence[float], *, tau: float = 5.0, delta: float = 0.0,
          cycles: int = DEFAULT_CYCLES, halfwidth_bins: int = 1,
          mz0_factor: float = INITIAL_MZ_FACTOR, jobs: Optional[int] = None) -> PhaseDiagram:
    """Crystalline fraction over two of ``delta``, ``tau``, ``t1_over_t2``.

    Values not swept come from ``base`` (``t1_over_t2 = base.t1 / base.t2``)
    or from the ``tau``/``delta`` keywords. ``tau`` is in units of
    ``base.t2``.
    """
    for name in (x_name, y_name):
        if name not in AXES:
            raise ValueError(f"unknown axis {name!r}; expected one of {AXES}")
    if x_name == y_name:
        raise ValueError("x and y axes must differ")
    xs = np.asarray(x_values, dtype=float)
    ys = np.asarray(y_values, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("sweep grids must be nonempty")

    fixed = {
        "t2": base.t2, "m_eq": base.m_eq, "omega1": base.omega1,
        "t1_over_t2": base.t1 / base.t2, "tau": float(tau), "delta": float(delta),
        "cycles": int(cycles), "halfwidth_bins": int(halfwidth_bins),
        "mz0_factor": float(mz0_factor),
    }
    cells = [dict(fixed, **{x_name: float(x), y_name: float(y)}) for y in ys for x in xs]
    results = run_cells(cell_fraction, cells, jobs)

    grid = np.full((len(ys), len(xs)), np.nan)
    errors = {}
    for idx, (f, err) in enumerate(results):
        i, j = divmod(idx, len(xs))
        if err is None:
            grid[i, j] = f
        else:
            errors[(i, j)] = err
    return PhaseDiagram(x_name, xs, y_name, ys, grid, errors)


def sweep_delta_ratio(base: SystemParams, deltas: Sequence[float], ratios: Sequence[float],
                      tau: float, cycles: int = DEFAULT_CYCLES, **kw) -> PhaseDiagram:
    """Crystalline fraction versus pulse error and ``T1/T2`` at fixed delay."""
    return sweep(base, "delta", deltas, "t1_over_t2", ratios, tau=tau, cycles=cycles, **kw)


def sweep_delta_tau(base: SystemParams, deltas: Sequence[float], taus: Sequence[float],
                    cycles: int = DEFAULT_CYCLES, **kw) -> PhaseDiagram:
    """Crystalline fraction versus pulse error and delay (in units of T2)."""
    return sweep(base, "delta", deltas, "tau", taus, cycles=cycles, **kw)
