"""CSV/JSON serialization, run manifests and atomic writes."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import SystemParams
from .sequence import PulseSequence

__all__ = [
    "fmt",
    "atomic_write_text",
    "write_csv",
    "read_csv",
    "to_jsonable",
    "write_json",
    "file_sha256",
    "manifest",
    "params_dict",
    "sequence_dict",
]


def fmt(x) -> str:
    """17 significant digits for floats, so values round-trip bit-exactly."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        return [], []
    return rows[0], rows[1:]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(to_jsonable(obj), indent=2) + "\n")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def params_dict(p: SystemParams) -> dict:
    return {"t1": p.t1, "t2": p.t2, "t_phi": p.t_phi, "m_eq": p.m_eq, "omega1": p.omega1}


def sequence_dict(seq: PulseSequence) -> dict:
    return {
        "unit": seq.unit,
        "pairs": [{"delay": d, "axis": pl.axis, "theta": pl.theta, "delta": pl.delta,
                   "duration": pl.duration} for d, pl in seq.pairs],
        "period": seq.period,
        "cycles": seq.cycles,
        "initial": [seq.initial.mx, seq.initial.my, seq.initial.mz],
    }


def manifest(command: str, inputs: Iterable = (), resolved: Optional[dict] = None) -> dict:
    """Everything needed to rerun ``command``; only ``timestamp`` varies."""
    from . import __version__

    return {
        "command": command,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "resolved": resolved or {},
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
