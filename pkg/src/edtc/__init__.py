"""Environment-assisted discrete time crystals in a dissipative two-level system.

A spin relaxes freely for a delay ``tau`` (Bloch relaxation with ``T1 >> T2``)
and is then flipped by a ``theta = pi + delta`` pulse; repeating the cycle
gives a period-doubled ``M_z(nT)`` whose subharmonic spectrum measures the
time-crystalline order.
"""

__version__ = "0.1.0"

from . import analysis, core, dsl, propagators, sequence, sweep
from .analysis import (
    FitNotConverged,
    PowerLawFit,
    SpectralResult,
    TooFewSamples,
    crystalline_fraction,
    fit_power_law,
    fwhm_vs_delta,
    lifetime_vs_tau,
    peak_fwhm,
    spectrum,
    subharmonic_peaks,
)
from .core import (
    AffineMap,
    LiouvilleState,
    Magnetization,
    SystemParams,
    bloch_to_liouville,
    liouville_to_bloch,
    validate_params,
)
from .dsl import format_sequence, load_sequence, parse_sequence
from .propagators import (
    PulseSpec,
    compose_n,
    cycle_map,
    exact_segment_map,
    free_evolution_map,
    lindblad_superoperator,
    rotation_map,
    rotation_superoperator,
)
from .sequence import (
    PulseSequence,
    StroboscopicSeries,
    analytic_two_cycles,
    evolve,
    first_order_two_cycles,
    intra_cycle_trace,
    protocol,
)
from .sweep import PhaseDiagram, sweep_delta_ratio, sweep_delta_tau
