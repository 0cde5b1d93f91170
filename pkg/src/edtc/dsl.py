"""Line-oriented pulse-program format.

Example::

    # delay-then-pi-pulse, times in units of T2
    params t1=100 tphi=auto t2=1 meq=0.8
    init mz=-0.72
    delay 10
    pulse y 180deg
    repeat 200

Directives are ``unit``, ``params``, ``init``, ``delay``, ``pulse`` and
``repeat``; ``#`` starts a comment. ``delay``/``pulse`` lines must alternate,
starting with ``delay``; each pair is one segment of the period.
"""

from __future__ import annotations

import math
import re
from typing import Optional

from .core import (
    EDTCError,
    Magnetization,
    SystemParams,
    validate_params,
)
from .propagators import PulseSpec
from .sequence import DEFAULT_CYCLES, INITIAL_MZ_FACTOR, PulseSequence

__all__ = [
    "SequenceError",
    "SequenceSyntaxError",
    "MissingDirective",
    "DuplicateDirective",
    "UnitError",
    "InvalidValue",
    "EXPERIMENT_OMEGA1",
    "parse_sequence",
    "format_sequence",
    "load_sequence",
]

#: 16.7 kHz RF amplitude, in rad/s; the default drive for ``unit seconds``.
EXPERIMENT_OMEGA1 = 2 * math.pi * 16.7e3
_DEFAULT_OMEGA1_T2 = 1000.0

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_NUM_RE = re.compile(rf"^{_NUM}$")
_ANGLE_RE = re.compile(rf"^({_NUM})(deg|rad|pi)$")
_UINT_RE = re.compile(r"^\d+$")
_TOKEN_RE = re.compile(r"\S+")

_PARAM_KEYS = ("t1", "t2", "tphi", "meq", "omega1")
_INIT_KEYS = ("mx", "my", "mz")
_SINGLE = ("unit", "params", "init", "repeat")


class SequenceError(EDTCError, ValueError):
    """Problem in a pulse program; ``line``/``col`` are 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line, self.col = line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


class SequenceSyntaxError(SequenceError):
    def __init__(self, line: int, col: int, expected: str, got: str = ""):
        self.expected = expected
        msg = f"expected {expected}" + (f", got {got!r}" if got else "")
        super().__init__(msg, line, col)


class MissingDirective(SequenceError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing directive {name!r}")


class DuplicateDirective(SequenceError):
    def __init__(self, name: str, line: int, col: int, first_line: int):
        self.name = name
        super().__init__(f"duplicate {name!r} (first given on line {first_line})", line, col)


class UnitError(SequenceError):
    pass


class InvalidValue(SequenceError):
    pass


def _tokens(line: str):
    body = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(body)]


def _eol(line: str) -> int:
    """Column just past the last token, where a missing argument would go."""
    return len(line.split("#", 1)[0].rstrip()) + 2


def _number(tok, lineno, expected="number"):
    text, col = tok
    if not _NUM_RE.match(text):
        raise SequenceSyntaxError(lineno, col, expected, text)
    return float(text)


def _angle(tok, lineno):
    text, col = tok
    m = _ANGLE_RE.match(text)
    if not m:
        raise SequenceSyntaxError(lineno, col, "angle like 180deg, 3.14rad or 1pi", text)
    value, unit = float(m.group(1)), m.group(2)
    if unit == "deg":
        return math.radians(value)
    if unit == "pi":
        return value * math.pi
    return value


def _keyvalues(toks, lineno, keys):
    out = {}
    for text, col in toks:
        key, eq, value = text.partition("=")
        if not eq or key not in keys or not value:
            raise SequenceSyntaxError(lineno, col, "key=value with key in " + "/".join(keys), text)
        if key in out:
            raise SequenceSyntaxError(lineno, col, f"single {key}=", text)
        out[key] = (value, col + len(key) + 1)
    return out


def _param_value(key, value, col, lineno):
    if value == "auto":
        if key not in ("t1", "t2", "tphi"):
            raise SequenceSyntaxError(lineno, col, f"number for {key}", value)
        return None
    if value == "inf" and key == "tphi":
        return math.inf
    return _number((value, col), lineno, f"number for {key}")


def parse_sequence(text: str) -> tuple[SystemParams, PulseSequence]:
    """Parse a pulse program into validated params and a sequence."""
    seen: dict[str, int] = {}
    unit = "t2"
    raw_params = None
    init = None
    cycles = DEFAULT_CYCLES
    body = []  # (kind, value, lineno, col, eol)

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        (word, col), args = toks[0], toks[1:]
        eol = _eol(line)
        if word in _SINGLE:
            if word in seen:
                raise DuplicateDirective(word, lineno, col, seen[word])
            seen[word] = lineno

        if word == "unit":
            if len(args) != 1 or args[0][0] not in ("t2", "seconds"):
                bad = args[0] if args else ("", eol)
                raise SequenceSyntaxError(lineno, bad[1], "unit t2 or unit seconds", bad[0])
            unit = args[0][0]
        elif word == "params":
            if not args:
                raise SequenceSyntaxError(lineno, eol, "key=value")
            kv = _keyvalues(args, lineno, _PARAM_KEYS)
            values = {k: _param_value(k, v, c, lineno) for k, (v, c) in kv.items()}
            autos = [k for k, (v, _) in kv.items() if v == "auto"]
            if len(autos) > 1:
                raise SequenceSyntaxError(lineno, kv[autos[1]][1], "at most one 'auto'", "auto")
            raw_params = (values, lineno)
        elif word == "init":
            kv = _keyvalues(args, lineno, _INIT_KEYS)
            comps = {k: _number((v, c), lineno) for k, (v, c) in kv.items()}
            init = (Magnetization(comps.get("mx", 0.0), comps.get("my", 0.0),
                                  comps.get("mz", 0.0)), lineno)
        elif word == "delay":
            if len(args) != 1:
                bad = args[1] if args else ("", eol)
                raise SequenceSyntaxError(lineno, bad[1], "single delay value", bad[0])
            d = _number(args[0], lineno, "delay duration")
            if d < 0:
                raise InvalidValue(f"negative delay {d}", lineno, args[0][1])
            body.append(("delay", d, lineno, col, eol))
        elif word == "pulse":
            if len(args) != 2:
                bad = args[2] if len(args) > 2 else ("", eol)
                raise SequenceSyntaxError(lineno, bad[1], "pulse <x|y> <angle>", bad[0])
            axis_tok, angle_tok = args
            if axis_tok[0] not in ("x", "y"):
                raise SequenceSyntaxError(lineno, axis_tok[1], "axis x or y", axis_tok[0])
            body.append(("pulse", (axis_tok[0], _angle(angle_tok, lineno)), lineno, col, eol))
        elif word == "repeat":
            if len(args) != 1 or not _UINT_RE.match(args[0][0]):
                bad = args[1] if len(args) > 1 else (args[0] if args else ("", eol))
                raise SequenceSyntaxError(lineno, bad[1], "non-negative integer", bad[0])
            cycles = int(args[0][0])
            if cycles < 1:
                raise InvalidValue("repeat count must be >= 1", lineno, args[0][1])
        else:
            raise SequenceSyntaxError(
                lineno, col, "one of unit/params/init/delay/pulse/repeat", word)

    if raw_params is None:
        raise MissingDirective("params")
    kinds = [b[0] for b in body]
    if "delay" not in kinds:
        raise MissingDirective("delay")
    if "pulse" not in kinds:
        raise MissingDirective("pulse")

    params = _resolve_params(*raw_params, unit)

    pairs = []
    expect = "delay"
    for kind, value, lineno, col, eol in body:
        if kind != expect:
            raise SequenceSyntaxError(lineno, col, expect, kind)
        if kind == "delay":
            pending = value
            expect = "pulse"
        else:
            axis, theta = value
            pairs.append((pending, PulseSpec.from_theta(theta, params.omega1, axis)))
            expect = "delay"
    if expect == "pulse":
        raise SequenceSyntaxError(lineno, eol, "pulse after delay")

    if init is None:
        initial = Magnetization(0.0, 0.0, INITIAL_MZ_FACTOR * params.m_eq)
    else:
        initial, lineno = init
        if initial.norm > 1 + 1e-12:
            raise InvalidValue(f"initial magnetization |M| = {initial.norm} > 1", lineno, 1)

    seq = PulseSequence(tau=pairs[0][0], pulse=pairs[0][1], cycles=cycles,
                        initial=initial, extra_pairs=tuple(pairs[1:]), unit=unit)
    return params, seq


def _resolve_params(raw: dict, lineno: int, unit: str) -> SystemParams:
    raw = dict(raw)
    if unit == "t2" and "t2" not in raw:
        raw["t2"] = 1.0
    t1, t2, tphi = raw.get("t1"), raw.get("t2"), raw.get("tphi")
    if t1 is None:
        if t2 is None or tphi is None:
            raise InvalidValue("t1=auto needs both t2 and tphi", lineno, 1)
        rate = 1 / t2 - (0 if math.isinf(tphi) else 1 / tphi)
        if rate <= 0:
            raise InvalidValue("t1=auto: 1/t2 - 1/tphi must be > 0", lineno, 1)
        t1 = 0.5 / rate
    if "omega1" not in raw:
        raw["omega1"] = _DEFAULT_OMEGA1_T2 if unit == "t2" else EXPERIMENT_OMEGA1
    try:
        p = validate_params({"t1": t1, "t2": t2, "t_phi": tphi,
                             "m_eq": raw.get("meq"), "omega1": raw["omega1"]})
    except EDTCError as exc:
        raise InvalidValue(str(exc), lineno, 1) from exc
    if unit == "t2" and abs(p.t2 - 1.0) > 1e-12:
        raise UnitError(f"times are in units of T2 but t2 resolves to {p.t2!r}", lineno, 1)
    return p


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def format_sequence(p: SystemParams, seq: PulseSequence) -> str:
    """Canonical text for ``(p, seq)``; ``parse_sequence`` reads it back."""
    lines = [
        f"unit {seq.unit}",
        f"params t1={_fmt(p.t1)} t2={_fmt(p.t2)} tphi={_fmt(p.t_phi)} "
        f"meq={_fmt(p.m_eq)} omega1={_fmt(p.omega1)}",
        f"init mx={_fmt(seq.initial.mx)} my={_fmt(seq.initial.my)} mz={_fmt(seq.initial.mz)}",
    ]
    for delay, pulse in seq.pairs:
        lines.append(f"delay {_fmt(delay)}")
        lines.append(f"pulse {pulse.axis} {_fmt(pulse.theta)}rad")
    lines.append(f"repeat {seq.cycles}")
    return "\n".join(lines) + "\n"


def load_sequence(path) -> tuple[SystemParams, PulseSequence]:
    with open(path, encoding="utf-8") as fh:
        return parse_sequence(fh.read())
