"""``edtc`` command line: simulate, spectrum, sweep, fit, figures.

Exit codes: 0 success, 1 bad input (parse/usage errors, unknown figure),
2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import FitNotConverged, TooFewSamples, fit_power_law, spectrum
from .core import EDTCError
from .dsl import SequenceError, load_sequence
from .figures import (
    SERIES_HEADER,
    SPECTRUM_HEADER,
    UnknownFigure,
    build_figure,
    phase_diagram_summary,
    phase_diagram_tables,
    series_rows,
    spectrum_rows,
    spectrum_summary,
    sweep_from_config,
    write_bundle,
)
from .io import manifest, params_dict, read_csv, sequence_dict, write_csv, write_json
from .sequence import evolve, intra_cycle_trace

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
SUPPORTED_MODELS = ("a*d^l+b",)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _fail(code: int, msg: str) -> int:
    print(f"edtc: {msg}", file=sys.stderr)
    return code


def _default_jobs() -> int:
    try:
        return int(os.environ.get("EDTC_JOBS", "1"))
    except ValueError:
        return 1


def cmd_simulate(args) -> int:
    if args.cycles is not None and args.cycles < 0:
        raise InputError(f"--cycles must be >= 0, got {args.cycles}")
    p, seq = load_sequence(args.sequence)
    cycles = seq.cycles if args.cycles is None else args.cycles
    series = evolve(p, seq, cycles=cycles)
    out = Path(args.out or Path(args.sequence).with_suffix(f".series.{args.format}").name)
    resolved = {"params": params_dict(p), "sequence": sequence_dict(seq), "cycles": cycles,
                "trace": args.trace, "format": args.format}
    man = manifest("simulate", [args.sequence], resolved)
    if args.format == "csv":
        write_csv(out, SERIES_HEADER, series_rows(series))
    else:
        write_json(out, {"columns": SERIES_HEADER, "rows": series_rows(series), "manifest": man})
    if args.trace:
        tr = intra_cycle_trace(p, seq, args.trace, cycles=cycles)
        write_csv(out.with_name(out.stem + "_trace.csv"), ["t", "cycle", "segment", "mx", "my", "mz"],
                  [[t, c, s, *m] for t, c, s, m in zip(tr.t, tr.cycle, tr.segment, tr.m)])
    write_json(out.with_name(out.name + ".manifest.json"), man)
    return EXIT_OK


def _series_from_csv(path) -> np.ndarray:
    header, rows = read_csv(path)
    if "mz" not in header:
        raise InputError(f"{path}: no 'mz' column")
    k = header.index("mz")
    try:
        return np.array([float(r[k]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: bad mz value ({exc})") from None


def cmd_spectrum(args) -> int:
    src = Path(args.input)
    resolved = {"pad": args.pad, "window_bins": args.window_bins}
    if src.suffix == ".csv":
        mz = _series_from_csv(src)
    else:
        p, seq = load_sequence(src)
        mz = evolve(p, seq, cycles=args.cycles).mz
        resolved.update(params=params_dict(p), sequence=sequence_dict(seq), cycles=len(mz) - 1)
    spec = spectrum(mz, pad_to=args.pad, halfwidth_bins=args.window_bins)
    prefix = args.out_prefix or src.stem
    write_csv(f"{prefix}_spectrum.csv", SPECTRUM_HEADER, spectrum_rows(spec))
    man = manifest("spectrum", [src], resolved)
    write_json(f"{prefix}_summary.json", dict(spectrum_summary(spec), manifest=man))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        pd = sweep_from_config(cfg, jobs=args.jobs)
    except (ValueError, KeyError, TypeError) as exc:
        # cells trap their own numeric failures, so anything here is the config
        raise InputError(f"{args.config}: bad sweep config ({exc})") from None
    prefix = args.out_prefix or Path(args.config).stem
    write_csv(f"{prefix}.csv", *phase_diagram_tables(pd))
    man = manifest("sweep", [args.config], {"config": cfg})
    write_json(f"{prefix}.json", dict(phase_diagram_summary(pd), manifest=man))
    if pd.success_fraction < 0.9:
        return _fail(EXIT_NUMERIC, f"only {pd.success_fraction:.0%} of cells succeeded")
    return EXIT_OK


def _read_points(path) -> list:
    header, rows = read_csv(path)
    try:
        float(header[0])
        rows = [header] + rows
    except (ValueError, IndexError):
        pass
    try:
        pts = [(float(r[0]), float(r[-1] if len(r) == 2 else r[1])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: bad point row ({exc})") from None
    if len(pts) < 4:
        raise InputError(f"{path}: need at least 4 points, got {len(pts)}")
    return pts


def cmd_fit(args) -> int:
    if args.model.replace(" ", "") not in SUPPORTED_MODELS:
        raise InputError(f"unsupported model {args.model!r}; only {SUPPORTED_MODELS[0]!r}")
    pts = _read_points(args.points)
    out = args.out or Path(args.points).with_suffix(".fit.json").name
    try:
        fit = fit_power_law(pts)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except FitNotConverged as exc:
        write_json(out, {"converged": False, "diagnostics": exc.diagnostics,
                         "manifest": manifest("fit", [args.points], {"model": args.model})})
        return _fail(EXIT_NUMERIC, f"{exc} {exc.diagnostics}")
    man = manifest("fit", [args.points], {"model": args.model})
    write_json(out, dict(fit.as_dict(), converged=True, manifest=man))
    return EXIT_OK


def cmd_figures(args) -> int:
    try:
        bundle = build_figure(args.name, jobs=args.jobs, cycles=args.cycles)
    except UnknownFigure as exc:
        return _fail(EXIT_INPUT, exc.args[0])
    out = write_bundle(bundle, args.out_dir)
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="edtc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="stroboscopic M(nT) series from a sequence file")
    s.add_argument("sequence")
    s.add_argument("--cycles", type=int)
    s.add_argument("--trace", type=int, default=0, metavar="DENSITY",
                   help="also write an intra-cycle trace with DENSITY samples per segment")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="spectrum, crystalline fraction and FWHM")
    s.add_argument("input", help="series CSV (with an mz column) or sequence file")
    s.add_argument("--pad", type=int)
    s.add_argument("--window-bins", type=int, default=1)
    s.add_argument("--cycles", type=int, help="cycle override when INPUT is a sequence file")
    s.add_argument("--out-prefix")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("sweep", help="crystalline-fraction phase diagram from a JSON config")
    s.add_argument("config")
    s.add_argument("--jobs", type=int, default=_default_jobs())
    s.add_argument("--out-prefix")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", help="fit y = a*d^l + b to a two-column CSV")
    s.add_argument("points")
    s.add_argument("--model", default=SUPPORTED_MODELS[0])
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("figures", help="write the dataset behind one figure")
    s.add_argument("name")
    s.add_argument("--out-dir", default="figures")
    s.add_argument("--jobs", type=int, default=_default_jobs())
    s.add_argument("--cycles", type=int)
    s.set_defaults(func=cmd_figures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SequenceError, InputError, FileNotFoundError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    except TooFewSamples as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    except (EDTCError, ArithmeticError, ValueError) as exc:
        return _fail(EXIT_NUMERIC, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
