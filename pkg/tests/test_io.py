import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edtc.io import atomic_write_text, fmt, manifest, read_csv, to_jsonable, write_csv, write_json


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_kinds():
    assert fmt(None) == ""
    assert fmt(np.int64(3)) == "3"
    assert fmt(True) == "1"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt("x") == "x"


def test_csv_round_trip(tmp_path):
    rows = [[0, 0.1, -2.5e-300], [1, math.pi, None]]
    write_csv(tmp_path / "a.csv", ["n", "t", "v"], rows)
    header, back = read_csv(tmp_path / "a.csv")
    assert header == ["n", "t", "v"]
    assert [float(v) for v in back[0]] == [0, 0.1, -2.5e-300]
    assert back[1][2] == ""


def test_read_csv_skips_comments(tmp_path):
    (tmp_path / "c.csv").write_text("# note\nd,y\n# mid\n1,2\n")
    assert read_csv(tmp_path / "c.csv") == (["d", "y"], [["1", "2"]])


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write_text(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_atomic_write_cleans_up_on_error(tmp_path, monkeypatch):
    import os

    def boom(*a):
        raise OSError("disk full")
    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write_text(tmp_path / "f.txt", "x")
    assert list(tmp_path.iterdir()) == []


def test_jsonable():
    obj = {"a": np.array([1.0, np.nan]), "b": math.inf, 1: np.float32(0.5), "c": (np.int8(2),)}
    assert to_jsonable(obj) == {"a": [1.0, None], "b": "inf", "1": 0.5, "c": [2]}


def test_json_floats_exact(tmp_path):
    x = 0.1 + 0.2
    write_json(tmp_path / "x.json", {"x": x})
    assert json.loads((tmp_path / "x.json").read_text())["x"] == x


def test_manifest_fields(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("abc")
    man = manifest("simulate", [src], {"k": 1})
    assert set(man) == {"command", "inputs", "resolved", "version", "timestamp"}
    assert man["inputs"][str(src)] == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")
