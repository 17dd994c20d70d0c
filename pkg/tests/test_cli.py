import json
import subprocess
import sys

import pytest

from ssa_lab import reports
from ssa_lab.cli import dispatch


def run(argv, capsys):
    code = dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_measure_bell_discord(capsys):
    code, out, _ = run(["measure", "discord", "--state", "bell", "--measured", "B"], capsys)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("q,expected", [("entropy", 0.0), ("mi", 2.0), ("coherent", 1.0),
                                        ("concurrence", 1.0), ("eof", 1.0), ("j", 1.0)])
def test_measure_quantities(capsys, q, expected):
    code, out, _ = run(["measure", q, "--state", "bell"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(expected, abs=1e-6)


def test_measure_tripartite(capsys):
    code, out, _ = run(["measure", "cmi", "--state", "ghz"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0)
    code, out, _ = run(["measure", "dtilde", "--state", "ghz", "--parts", "A|B|C"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.0, abs=1e-6)


def test_check_ssa_sweep(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["check", "ssa", "--random", "1000", "--dims", "2,2,2", "--seed", "42", "--out", str(out)], capsys)
    assert code == 0
    doc = reports.parse_json(out.read_text())
    assert doc["kind"] == "ssa" and doc["trials"] == 1000 and doc["violations"] == 0


def test_check_single_state(capsys):
    code, out, _ = run(["check", "bssa", "--state", "ghz"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "satisfied"


def test_violation_exit_code(capsys):
    code, _, _ = run(["check", "ssa", "--state", "ghz", "--slack", "-5"], capsys)
    assert code == 2
    code, _, _ = run(["sweep", "ssa", "--trials", "3", "--slack", "-5"], capsys)
    assert code == 2


def test_dataproc(tmp_path, capsys):
    out = tmp_path / "dp.json"
    code, _, _ = run(["dataproc", "--input", "bell", "--ch1", "amp:0.3", "--ch2", "phase:0.5", "--out", str(out)], capsys)
    assert code == 0
    doc = reports.parse_json(out.read_text())
    assert doc["identity_residual"] <= 1e-9
    for key in ("coherent_info_1", "coherent_info_2", "cmi", "delta_via_b", "delta_via_e",
                "cross_residual", "lii_e1e2", "lii_e1", "lii_margin"):
        assert key in doc


@pytest.mark.parametrize("argv", [["bogus"], [], ["measure", "discord", "--state", "nope"],
                                  ["measure", "discord"], ["dataproc", "--ch1", "amp:2", "--ch2", "amp:0"],
                                  ["sweep", "ssa", "--trials", "2", "--rank", "x..y"],
                                  ["state"]])
def test_usage_errors_exit_1(argv, capsys):
    assert dispatch(argv) == 1


def test_unwritable_output(capsys):
    assert dispatch(["measure", "mi", "--state", "bell", "--out", "/nonexistent/dir/x.json"]) == 1


def test_seed_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("SSA_LAB_SEED", "5")
    _, a, _ = run(["state", "gen", "random-pure", "--dims", "2,2"], capsys)
    _, b, _ = run(["state", "gen", "random-pure", "--dims", "2,2", "--seed", "5"], capsys)
    _, c, _ = run(["state", "gen", "random-pure", "--dims", "2,2", "--seed", "6"], capsys)
    assert a == b and a != c
    monkeypatch.setenv("SSA_LAB_SEED", "x")
    assert dispatch(["state", "gen", "bell"]) == 1


def test_state_gen_then_load(tmp_path, capsys):
    f = tmp_path / "s.json"
    assert dispatch(["state", "gen", "random-mixed", "--dims", "2,2,2", "--rank", "2..3", "--seed", "3", "--out", str(f)]) == 0
    code, out, _ = run(["measure", "cmi", "--state", str(f)], capsys)
    assert code == 0 and json.loads(out)["value"] >= -1e-9


def test_saturate_and_search(tmp_path, capsys):
    code, out, _ = run(["saturate", "--state", "markov", "--seed", "2", "--patience", "4"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["markov"]["is_markov"] and doc["saturation"]["j_equality"] <= 2e-3
    code, out, _ = run(["search-dtilde", "--trials", "0"], capsys)
    assert code == 0 and json.loads(out)["found"] == 0


def test_deterministic_files_modulo_timestamp(tmp_path):
    paths = [tmp_path / f"{i}.json" for i in range(2)]
    for p in paths:
        assert dispatch(["sweep", "maxBound", "--trials", "3", "--seed", "9", "--rank", "1..4",
                         "--patience", "4", "--out", str(p)]) == 0
    texts = [p.read_text().splitlines() for p in paths]
    strip = [[ln for ln in t if reports.TIMESTAMP_KEY not in ln] for t in texts]
    assert strip[0] == strip[1]


def test_csv_output(tmp_path):
    p = tmp_path / "s.csv"
    assert dispatch(["sweep", "ssa", "--trials", "5", "--format", "csv", "--out", str(p)]) == 0
    assert len(p.read_text().strip().split("\n")) == 6


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "ssa_lab.cli", "measure", "mi", "--state", "bell"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["value"] == pytest.approx(2.0)
