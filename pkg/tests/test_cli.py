import csv
import json

import pytest

from hopfion.cli import EXIT_DATA, EXIT_INVALID, EXIT_OK, main, parse_dims, parse_param


def run(argv):
    return main([str(a) for a in argv])


def test_parsers():
    assert parse_dims("16") == (16, 16, 16)
    assert parse_dims("8,10,12") == (8, 10, 12)
    assert parse_param("A=[[1,0,0],[0,1,0]]") == ("A", [[1, 0, 0], [0, 1, 0]])


def test_gen_and_hopf(tmp_path):
    f = tmp_path / "hopf.qf3"
    assert run(["gen", "--name", "hopf_box", "--dims", 40, "--R", 4, "-o", f]) == EXIT_OK
    out = tmp_path / "inv.json"
    assert run(["invariants", f, "--hopf", "--no-timestamp", "-o", out]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["results"]["hopf"]["snapped"] == 1
    assert rep["tolerances"]["snap_tol"] == 0.25
    assert "timestamp" not in rep


def test_reports_are_reproducible(tmp_path):
    f = tmp_path / "t.qf3"
    assert run(["gen", "--name", "t3", "--domain", "torus", "--dims", 16,
                "--param", "A=[[1,0,0],[0,1,0]]", "-o", f]) == EXIT_OK
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert run(["invariants", f, "--class", "--divisibility", "--no-timestamp", "-o", out]) == EXIT_OK
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    rep = json.loads(texts[0])
    assert rep["results"]["class"]["snapped"] == [0, 0, 1]
    assert rep["results"]["divisibility"]["divisibility"] == 1


def test_integrality_failure_is_a_data_error(tmp_path, capsys):
    f = tmp_path / "t.qf3"
    run(["gen", "--name", "t3", "--domain", "torus", "--dims", 16,
         "--param", "A=[[3,1,2],[-5,0,-2]]", "-o", f])
    capsys.readouterr()
    assert run(["invariants", f, "--class", "--no-timestamp"]) == EXIT_DATA
    rep = json.loads(capsys.readouterr().out)
    assert rep["results"]["class"]["confidence"] == "FAILED"
    assert rep["results"]["class"]["error"] == "IntegralityFailure"


def test_energy_and_lift(tmp_path, capsys):
    f = tmp_path / "p.qf3"
    run(["gen", "--name", "power", "--param", "n=1", "--dims", 24, "--R", 4, "-o", f])
    capsys.readouterr()
    assert run(["energy", f, "--no-timestamp"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["functional"] == "skyrme" and rep["energy"]["total"] > 0


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--check", "degree_power", "--dims", "16,24", "-o", out]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["dims"] for r in rows] == ["16", "24"]
    assert set(rows[0]) >= {"check", "dims", "h", "value", "gap", "residual", "ratio"}


def test_relax_trace(tmp_path):
    f = tmp_path / "t.qf3"
    run(["gen", "--name", "t3", "--domain", "torus", "--dims", 12,
         "--param", "A=[[0,1,0],[0,0,1]]", "-o", f])
    trace = tmp_path / "trace.csv"
    rep = tmp_path / "relax.json"
    assert run(["relax", f, "--steps", 4, "--record-every", 2, "--trace", trace,
                "--report", rep, "--no-timestamp", "-o", tmp_path / "out.qf3"]) == EXIT_OK
    assert len(list(csv.DictReader(trace.open()))) >= 5
    assert json.loads(rep.read_text())["class_constant"] is True


@pytest.mark.parametrize("argv", [
    ["gen", "--name", "nonsense", "-o", "x.qf3"],
    ["gen", "--name", "hopf_box", "--dims", "4", "-o", "x.qf3"],
    ["invariants", "/nonexistent/field.qf3"],
])
def test_validation_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == EXIT_INVALID
