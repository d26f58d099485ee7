"""Command-line entry points, run in-process and as a subprocess."""
import json
import subprocess
import sys

import pytest

from blaschke_sums.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_eval_origin(tmp_path, capsys):
    assert run(tmp_path, "eval", "--product", "0,0", "--point", "0") == 0
    assert capsys.readouterr().out.strip() in ("0+0i", "0.0+0.0i", "0+0j")
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "eval" and man["status"] == "ok"


def test_eval_turn(tmp_path, capsys):
    # boundary input prints the image as a turn; z^2 doubles 1/8
    assert run(tmp_path, "eval", "--product", "0,0", "--turn", "1/8") == 0
    assert float(capsys.readouterr().out) == 0.25


def test_bad_product_exit_2(tmp_path):
    assert run(tmp_path, "eval", "--product", "1.5", "--point", "0") == 2


def test_unknown_lemma_exit_2(tmp_path):
    assert run(tmp_path, "lemma-suite", "--id", "nope", "--trials", "1") == 2


def test_iterate_writes_orbit(tmp_path):
    assert run(tmp_path, "iterate", "--product", "0,0", "--turn", "1/3", "--n", "4") == 0
    rows = (tmp_path / "orbit.csv").read_text().strip().splitlines()
    assert len(rows) == 6                       # header plus n = 0..4


def test_lemma_suite_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["lemma-suite", "--id", "lemma2.1", "--trials", "30", "--seed", "4",
                     "--out", str(d)]) == 0
    assert (a / "report.jsonl").read_bytes() == (b / "report.jsonl").read_bytes()


def test_solve_target(tmp_path):
    code = run(tmp_path, "solve-target", "--product", "0,0", "--coeffs", "power:1",
               "--target", "0.3+0.4i")
    assert code == 0
    trace = json.loads((tmp_path / "trace.json").read_text())
    assert trace["certified"] and trace["final_residual"] <= 1e-3
    assert (tmp_path / "sums.csv").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man["outputs"]) >= {"trace.json", "sums.csv"}


def test_peano_scan_cli(tmp_path):
    code = run(tmp_path, "peano-scan", "--product", "0,0", "--coeffs", "power:1.5",
               "--disc=-0.57,0,0.2", "--resolution", "16", "--budget", "4096")
    assert code == 0
    assert (tmp_path / "grid.pgm").read_bytes().startswith(b"P5")
    assert json.loads((tmp_path / "grid.json").read_text())["samples_used"] == 4096


def test_abel_cli(tmp_path):
    assert run(tmp_path, "abel-check", "--product", "0,0", "--coeffs", "geometric:0.5",
               "--turn", "0.25", "--j-max", "6") == 0
    rep = json.loads((tmp_path / "abel.json").read_text())
    assert rep["within_bound"] and len(rep["rows"]) == 6


def test_module_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "blaschke_sums", "eval", "--product", "0,0.5",
                          "--point", "0.5", "--out", str(tmp_path)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip().startswith("0")
