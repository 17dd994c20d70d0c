import json

import numpy as np
from hypothesis import given, strategies as hst

from ssa_lab import inequalities as iq
from ssa_lab import reports
from ssa_lab.linalg import Layout


@given(hst.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6))
def test_round_sig_idempotent(x):
    r = reports.round_sig(x)
    assert reports.round_sig(r) == r
    assert abs(r - x) <= 1e-11 * max(1.0, abs(x))


def test_numpy_types_normalized():
    doc = reports.normalize({"a": np.float64(1 / 3), "b": np.int64(3), "c": np.bool_(True), "d": np.arange(2)})
    assert doc == {"a": 0.333333333333, "b": 3, "c": True, "d": [0, 1]}


def test_roundtrip_field_identical(tmp_path):
    s = iq.sweep_random("ssa", 5, Layout.from_dims((2, 2, 2)), (1, 8), 1)
    path = tmp_path / "r.json"
    reports.emit(s, path)
    parsed = reports.parse_json(path.read_text())
    assert parsed == reports.normalize(s)
    assert reports.TIMESTAMP_KEY in json.loads(path.read_text())


def test_empty_sweep_file(tmp_path):
    s = iq.sweep_random("ssa", 0, Layout.from_dims((2, 2, 2)), (1, 8), 1)
    path = tmp_path / "e.json"
    reports.emit(s, path)
    assert reports.parse_json(path.read_text())["trials"] == 0
    assert reports.to_csv(s).count("\n") == 1


def test_csv_rows_per_trial():
    s = iq.sweep_random("ssa", 7, Layout.from_dims((2, 2, 2)), (1, 8), 1)
    lines = reports.to_csv(s).strip().split("\n")
    assert len(lines) == 8 and lines[0].startswith("trial,seed,rank")
