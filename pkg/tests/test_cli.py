"""End-to-end runner checks through real subprocesses.

Values are checked against the same independent oracles the library tests
use: arithmetic Born probabilities, the 2/n Pauli commutator law, binomial
window masses, and hand-built mixtures. Formatting tests pin the CSV schema
and the byte-stability of seeded JSON reports.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from conftest import binom_window_mass

import macrofield.cli as cli
from macrofield._optim import OptimizerFailed
from macrofield.linalg import EigFailed


def run_cli(*argv: str, threads: str = "1"):
    env = os.environ.copy()
    env["MACROFIELD_THREADS"] = threads
    return subprocess.run(
        [sys.executable, "-m", "macrofield", *argv],
        capture_output=True,
        text=True,
        env=env,
        timeout=600,
    )


def run_json(*argv: str, threads: str = "1") -> dict:
    proc = run_cli(*argv, "--no-timestamp", threads=threads)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_born_converge_constant_column():
    report = run_json("born-converge", "--psi", "0.8,0.6", "--lambda", "1", "--n", "1..10")
    assert report["command"] == "born-converge"
    assert [r["n"] for r in report["records"]] == list(range(1, 11))
    for rec in report["records"]:
        assert rec["born"] == 0.36
        assert abs(rec["value"] - 0.36) <= 1e-12
    assert report["summary"]["ok"] is True
    assert report["config"]["psi"] == [0.8, 0.6]


def test_commutator_decay_scaled_column():
    report = run_json("commutator-decay", "--seed1", "X", "--seed2", "Z", "--n", "2..8")
    for rec in report["records"]:
        assert abs(rec["scaled"] - 2.0) <= 1e-8
        assert abs(rec["value"] - 2.0 / rec["n"]) <= 1e-10
    assert abs(report["summary"]["fitted_exponent"] - 1.0) <= 1e-6


def test_norm_gap_order_two_seed():
    report = run_json("norm-gap", "--section", "sym2(X,Z)", "--n", "2..6")
    recs = report["records"]
    assert [r["n"] for r in recs] == [2, 3, 4, 5, 6]
    for rec in recs:
        assert abs(rec["product_sup"] - 0.5) <= 1e-6
        assert rec["gap"] >= -1e-8
        assert abs(rec["gap"] - (rec["exact_norm"] - rec["product_sup"])) <= 1e-12
    assert recs[-1]["gap"] < recs[0]["gap"]


def test_window_mass_binomial_oracle():
    report = run_json(
        "window-mass", "--psi", "0.8,0.6", "--epsilon", "0.15", "--n", "1..12"
    )
    assert report["summary"]["born"] == 0.36
    for rec in report["records"]:
        want = binom_window_mass(rec["n"], 0.36, 0.15)
        assert abs(rec["mass"] - want) <= 1e-9


def test_slln_mc_example_and_byte_stability(tmp_path):
    argv = (
        "slln-mc", "--p", "0.3", "--horizon", "10000", "--trials", "10000",
        "--delta", "0.02", "--rng-seed", "7", "--no-timestamp",
    )
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(*argv, "--out", str(out1)).returncode == 0
    assert run_cli(*argv, "--out", str(out2)).returncode == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    rec = report["records"][0]
    assert rec["hit_fraction"] >= 0.99
    assert abs(rec["hoeffding_bound"] - 2.0 * 2.718281828459045 ** (-8.0)) <= 1e-12


def test_boolean_check_agreement():
    report = run_json(
        "boolean-check", "--instances", "12", "--sites", "5", "--rng-seed", "11"
    )
    assert len(report["records"]) == 12
    assert report["summary"]["max_abs_error"] <= 1e-10
    assert report["summary"]["ok"] is True
    # same seed, same report
    again = run_json(
        "boolean-check", "--instances", "12", "--sites", "5", "--rng-seed", "11"
    )
    assert again == report


def test_definetti_fit_round_trip():
    report = run_json(
        "definetti-fit", "--atoms", "0.5:0,0,1;0.5:1,0,0", "--sites", "6", "--k-max", "6"
    )
    assert report["summary"]["residual"] <= 1e-6
    assert report["summary"]["budget_exhausted"] is False
    weights = sorted(rec["weight"] for rec in report["records"])
    assert len(weights) == 2
    assert all(abs(w - 0.5) <= 1e-3 for w in weights)
    points = sorted((rec["x"], rec["y"], rec["z"]) for rec in report["records"])
    for got, want in zip(points, [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0)]):
        assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-3


def test_field_check_limit_oracle():
    report = run_json(
        "field-check", "--atoms", "0.25:0,0,0.8;0.75:0.3,0,-0.5", "--section", "avg(Z)"
    )
    assert [r["n"] for r in report["records"]] == list(range(1, 9))
    assert abs(report["summary"]["limit_value"] - (-0.175)) <= 1e-12
    assert report["summary"]["max_abs_error"] <= 1e-9
    assert report["summary"]["ok"] is True


def test_csv_schema_and_config_echo():
    proc = run_cli(
        "commutator-decay", "--seed1", "X", "--seed2", "Z", "--n", "2..4",
        "--format", "csv", "--no-timestamp",
    )
    assert proc.returncode == 0
    lines = proc.stdout.strip().split("\n")
    assert lines[0] == "# command=commutator-decay"
    header_idx = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    assert lines[header_idx] == "n,value,scaled"
    data = [ln for ln in lines[header_idx + 1 :] if not ln.startswith("#")]
    assert len(data) == 3
    assert data[0].split(",")[0] == "2"
    assert "# seed1=avg(X)" in lines
    assert "# n_list=2,3,4" in lines


def test_out_file_and_quiet_stdout(tmp_path):
    out = tmp_path / "report.csv"
    proc = run_cli(
        "born-converge", "--psi", "0.6,0.8", "--n", "1..3",
        "--format", "csv", "--no-timestamp", "--out", str(out),
    )
    assert proc.returncode == 0
    assert proc.stdout == ""
    text = out.read_text()
    assert text.count("\n") >= 5
    assert "n,value,born,abs_error" in text


def test_n_list_is_normalized():
    report = run_json("window-mass", "--psi", "0.8,0.6", "--n", "5,3,3")
    assert report["config"]["n_list"] == [3, 5]
    assert [r["n"] for r in report["records"]] == [3, 5]


def test_threaded_run_matches_serial():
    argv = ("window-mass", "--psi", "0.8,0.6", "--epsilon", "0.2", "--n", "1..6")
    serial = run_cli(*argv, "--no-timestamp", threads="1")
    threaded = run_cli(*argv, "--no-timestamp", threads="3")
    assert serial.returncode == 0 and threaded.returncode == 0
    assert serial.stdout == threaded.stdout


def test_timestamp_appears_by_default():
    proc = run_cli("born-converge", "--psi", "1,0", "--lambda", "0", "--n", "1..2")
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert "timestamp" in report
    assert "wall_time_s" in report


@pytest.mark.parametrize(
    "argv",
    [
        ("bogus-cmd",),
        ("norm-gap", "--section", "avg(Q)", "--n", "2..4"),
        ("commutator-decay", "--seed1", "sym2(X,Z)", "--seed2", "Z", "--n", "1..4"),
        ("born-converge", "--psi", "0.8,0.6", "--n", "4..2"),
        ("born-converge", "--psi", "0,0", "--n", "1..2"),
        ("born-converge", "--psi", "0.8,0.6", "--lambda", "7", "--n", "1..2"),
        ("definetti-fit", "--atoms", "0.9:0,0,1;0.2:1,0,0"),
        ("definetti-fit", "--atoms", "1.0:0,0,2"),
        ("slln-mc", "--p", "1.5", "--horizon", "10", "--trials", "5", "--delta", "0.1"),
        ("slln-mc", "--p", "0.3", "--horizon", "10", "--trials", "5",
         "--delta", "0.1", "--rng-seed", "-1"),
        ("window-mass", "--psi", "0.8,0.6", "--epsilon", "-0.1", "--n", "1..3"),
        ("field-check", "--atoms", "1.0:0,0,1", "--section", "sym2(X,Z)", "--n", "1..4"),
    ],
)
def test_bad_input_exits_2(argv):
    proc = run_cli(*argv)
    assert proc.returncode == 2
    assert proc.stderr.strip() != ""


def test_help_exits_0():
    assert run_cli("--help").returncode == 0
    assert cli.run(["--help"]) == 0


def test_numerical_failure_exits_3(monkeypatch, capsys):
    def sup_fails(*args, **kwargs):
        raise OptimizerFailed("no start converged")

    monkeypatch.setattr(cli, "product_state_sup", sup_fails)
    assert cli.run(["norm-gap", "--section", "avg(Z)", "--n", "2..3"]) == 3

    def eig_fails(*args, **kwargs):
        raise EigFailed("eigensolver diverged")

    monkeypatch.setattr(cli, "commutator_decay", eig_fails)
    assert cli.run(["commutator-decay", "--seed1", "X", "--seed2", "Z", "--n", "2..3"]) == 3
    err = capsys.readouterr().err
    assert "error:" in err


def test_bad_thread_env_exits_2():
    proc = run_cli("born-converge", "--psi", "1,0", "--n", "1..2", threads="zero")
    assert proc.returncode == 2
