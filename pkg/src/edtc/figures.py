"""Canned datasets for each simulated figure, driven by the files in ``recipes/``.

Every builder returns a :class:`Bundle` of named tables plus a JSON summary;
:func:`write_bundle` puts them on disk next to a manifest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .analysis import (
    fit_power_law,
    fwhm_vs_delta,
    lifetime_vs_tau,
    spectrum,
    subharmonic_peaks,
)
from .core import validate_params
from .dsl import load_sequence
from .io import manifest, params_dict, sequence_dict, write_csv, write_json
from .propagators import PulseSpec
from .sequence import PulseSequence, evolve
from .sweep import PhaseDiagram, sweep

__all__ = [
    "FIGURES",
    "UnknownFigure",
    "Bundle",
    "recipe_path",
    "axis_values",
    "sweep_from_config",
    "phase_diagram_tables",
    "build_figure",
    "write_bundle",
]


class UnknownFigure(KeyError):
    pass


@dataclass
class Bundle:
    name: str
    tables: dict = field(default_factory=dict)  # filename -> (header, rows)
    summary: dict = field(default_factory=dict)
    inputs: list = field(default_factory=list)


def recipe_path(name: str) -> Path:
    return Path(str(resources.files("edtc") / "recipes" / name))


def _recipe(name: str) -> tuple[dict, Path]:
    path = recipe_path(name)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh), path


def axis_values(spec: dict) -> np.ndarray:
    """Grid from ``{"values": [...]}`` or ``{"start", "stop", "num", "scale"}``;
    ``"unit": "pi"`` multiplies by pi."""
    if "values" in spec:
        vals = np.asarray(spec["values"], dtype=float)
    else:
        start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        if spec.get("scale", "linear") == "log":
            vals = np.logspace(math.log10(start), math.log10(stop), num)
        else:
            vals = np.linspace(start, stop, num)
    if spec.get("unit") == "pi":
        vals = vals * math.pi
    return vals


def sweep_from_config(cfg: dict, jobs: Optional[int] = None) -> PhaseDiagram:
    base = validate_params(cfg["base"])
    kw = {k: cfg[k] for k in ("tau", "delta", "cycles", "halfwidth_bins", "mz0_factor") if k in cfg}
    return sweep(base, cfg["x_axis"]["name"], axis_values(cfg["x_axis"]),
                 cfg["y_axis"]["name"], axis_values(cfg["y_axis"]), jobs=jobs, **kw)


def phase_diagram_tables(pd: PhaseDiagram) -> tuple[list, list]:
    header = [f"{pd.y_name}\\{pd.x_name}"] + ["%.17g" % x for x in pd.x_values]
    rows = [[y] + [None if np.isnan(v) else v for v in row]
            for y, row in zip(pd.y_values, pd.f_grid)]
    return header, rows


def phase_diagram_summary(pd: PhaseDiagram) -> dict:
    return {
        "x_axis": {"name": pd.x_name, "values": pd.x_values},
        "y_axis": {"name": pd.y_name, "values": pd.y_values},
        "f_grid": pd.f_grid,
        "errors": [{"row": i, "col": j, "message": m} for (i, j), m in sorted(pd.errors.items())],
        "success_fraction": pd.success_fraction,
    }


def series_rows(series) -> list:
    return [[int(n), t, *m] for n, t, m in zip(series.n, series.t, series.m)]


SERIES_HEADER = ["n", "t", "mx", "my", "mz"]
SPECTRUM_HEADER = ["nu", "re", "im", "power"]


def spectrum_rows(spec) -> list:
    return [[nu, a.real, a.imag, pw] for nu, a, pw in zip(spec.nu, spec.amp, spec.power)]


def spectrum_summary(spec) -> dict:
    return {"f": spec.f, "fwhm": spec.fwhm, "peak_nu": spec.peak_nu,
            "peaks": subharmonic_peaks(spec), "n_samples": spec.n_samples,
            "pad_to": spec.pad_to, "halfwidth_bins": spec.halfwidth_bins}


def _with_pulse(seq: PulseSequence, theta: float, omega1: float, tau=None) -> PulseSequence:
    pulse = PulseSpec.from_theta(theta, omega1, seq.pulse.axis)
    return PulseSequence(seq.tau if tau is None else tau, pulse, seq.cycles,
                         seq.initial, seq.extra_pairs, seq.unit)


def fig1(jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe("fig1.json")
    seq_path = recipe_path(cfg["sequence"])
    p, seq = load_sequence(seq_path)
    if cycles is not None:
        seq = seq.with_cycles(cycles)
    b = Bundle("fig1", inputs=[cfg_path, seq_path])
    series = evolve(p, seq)
    spec = spectrum(series)
    b.tables["series.csv"] = (SERIES_HEADER, series_rows(series))
    b.tables["spectrum.csv"] = (SPECTRUM_HEADER, spectrum_rows(spec))

    thetas = axis_values(cfg["theta_over_pi"]) * math.pi
    pad = int(cfg["map_pad"])
    mz_rows, spec_rows, frac_rows = [], [], []
    nu_map = None
    for theta in thetas:
        s = evolve(p, _with_pulse(seq, theta, p.omega1))
        sp = spectrum(s)
        small = spectrum(s, pad_to=max(pad, 1 << (len(s) - 1).bit_length()))
        nu_map = small.nu
        mz_rows.append([theta / math.pi, *s.mz])
        spec_rows.append([theta / math.pi, *small.power])
        frac_rows.append([theta / math.pi, sp.f, sp.fwhm, sp.peak_nu])
    b.tables["mz_vs_theta.csv"] = (["theta_over_pi"] + [f"n{k}" for k in range(len(series))], mz_rows)
    b.tables["spectrum_vs_theta.csv"] = (["theta_over_pi"] + ["%.17g" % v for v in nu_map], spec_rows)
    b.tables["fraction_vs_theta.csv"] = (["theta_over_pi", "f", "fwhm", "peak_nu"], frac_rows)
    b.summary = {"params": params_dict(p), "sequence": sequence_dict(seq),
                 "spectrum": spectrum_summary(spec)}
    return b


def fig2(jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe("fig2.json")
    b = Bundle("fig2", inputs=[cfg_path])
    for name in cfg["sequences"]:
        path = recipe_path(name)
        b.inputs.append(path)
        p, seq = load_sequence(path)
        if cycles is not None:
            seq = seq.with_cycles(cycles)
        series = evolve(p, seq)
        spec = spectrum(series)
        stem = Path(name).stem
        b.tables[f"{stem}_series.csv"] = (SERIES_HEADER, series_rows(series))
        b.tables[f"{stem}_spectrum.csv"] = (SPECTRUM_HEADER, spectrum_rows(spec))
        b.summary[stem] = {"params": params_dict(p), "sequence": sequence_dict(seq),
                           "spectrum": spectrum_summary(spec),
                           "expected_split_nu": [(math.pi + seq.pulse.delta) / (2 * math.pi),
                                                 1 - (math.pi + seq.pulse.delta) / (2 * math.pi)]}
    return b


def _fig3_sweep(name: str, jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe(f"{name}.json")
    if cycles is not None:
        cfg = dict(cfg, cycles=cycles)
    pd = sweep_from_config(cfg, jobs)
    b = Bundle(name, inputs=[cfg_path])
    b.tables["f_grid.csv"] = phase_diagram_tables(pd)
    b.summary = {"config": cfg, "phase_diagram": phase_diagram_summary(pd)}
    return b


def fig3a(jobs=None, cycles=None) -> Bundle:
    return _fig3_sweep("fig3a", jobs, cycles)


def fig3b(jobs=None, cycles=None) -> Bundle:
    return _fig3_sweep("fig3b", jobs, cycles)


def fig3c(jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe("fig3c.json")
    p = validate_params(cfg["base"])
    n = int(cycles or cfg["cycles"])
    deltas = np.asarray(cfg["delta_over_pi"], dtype=float) * math.pi
    points = fwhm_vs_delta(p, deltas, cfg["tau"], n)
    fit = fit_power_law(points)
    b = Bundle("fig3c", inputs=[cfg_path])
    b.tables["fwhm_vs_delta.csv"] = (["delta", "delta_over_pi", "fwhm"],
                                     [[d, d / math.pi, w] for d, w in points])
    b.summary = {"config": cfg, "fit": fit.as_dict(),
                 "reference_lambda": cfg.get("reference_lambda")}
    return b


def fig4(jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe("fig4.json")
    seq_path = recipe_path(cfg["sequence"])
    p, seq = load_sequence(seq_path)
    if cycles is not None:
        seq = seq.with_cycles(cycles)
    thetas = np.radians(axis_values(cfg["theta_deg"]))
    rows = []
    for theta in thetas:
        row = [math.degrees(theta)]
        for tau in cfg["taus"]:
            row.append(spectrum(evolve(p, _with_pulse(seq, theta, p.omega1, tau))).f)
        rows.append(row)
    b = Bundle("fig4", inputs=[cfg_path, seq_path])
    b.tables["fraction_vs_theta.csv"] = (["theta_deg"] + [f"f_tau_{t!r}" for t in cfg["taus"]], rows)
    b.summary = {"params": params_dict(p), "taus": cfg["taus"]}
    return b


def fig5(jobs=None, cycles=None) -> Bundle:
    cfg, cfg_path = _recipe("fig5.json")
    b = Bundle("fig5", inputs=[cfg_path])
    taus, delta, p = [], None, None
    for name in cfg["sequences"]:
        path = recipe_path(name)
        b.inputs.append(path)
        p, seq = load_sequence(path)
        if cycles is not None:
            seq = seq.with_cycles(cycles)
        series = evolve(p, seq)
        taus.append(seq.tau)
        delta = seq.pulse.delta
        b.tables[f"{Path(name).stem}_series.csv"] = (
            SERIES_HEADER + ["t_over_t1"],
            [row + [row[1] / p.t1] for row in series_rows(series)])
    n_life = int(cfg["lifetime_cycles"])
    errored = lifetime_vs_tau(p, delta, taus, n_life)
    perfect = lifetime_vs_tau(p, 0.0, taus, n_life)
    b.tables["lifetime_vs_tau.csv"] = (
        ["tau", "lifetime_delta", "lifetime_perfect"],
        [[t, a, c] for (t, a), (_, c) in zip(errored, perfect)])
    b.summary = {"params": params_dict(p), "delta": delta, "taus": taus,
                 "lifetime_units": "time", "lifetime_cycles": n_life}
    return b


FIGURES: dict[str, Callable[..., Bundle]] = {
    "fig1": fig1, "fig2": fig2, "fig3a": fig3a, "fig3b": fig3b,
    "fig3c": fig3c, "fig4": fig4, "fig5": fig5,
}


def build_figure(name: str, jobs=None, cycles=None) -> Bundle:
    try:
        builder = FIGURES[name]
    except KeyError:
        raise UnknownFigure(f"unknown figure {name!r}; choose from {sorted(FIGURES)}") from None
    return builder(jobs=jobs, cycles=cycles)


def write_bundle(bundle: Bundle, out_dir) -> Path:
    out = Path(out_dir) / bundle.name
    for fname, (header, rows) in bundle.tables.items():
        write_csv(out / fname, header, rows)
    man = manifest(f"figures {bundle.name}", bundle.inputs,
                   {"files": sorted(bundle.tables)})
    write_json(out / "summary.json", dict(bundle.summary, manifest=man))
    write_json(out / "manifest.json", man)
    return out
