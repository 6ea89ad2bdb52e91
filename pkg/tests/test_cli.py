import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from unsharp import cli
from unsharp import io as uio
from unsharp.instruments import estimate_qubit_e_matrix
from unsharp.measures import measure_report
from unsharp.monotonicity import lambda_sweep
from unsharp.observables import computational_pvm, trivial_observable
from unsharp.search import conjecture_scan

from conftest import povm_example1, povm_w


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, povm in {
        "ex1": povm_example1(),
        "t2": trivial_observable(2, 2),
        "t3": trivial_observable(3, 3),
        "z": computational_pvm(2),
        "w": povm_w(),
    }.items():
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(uio.povm_to_json(povm))
    bad = {"dim": 2, "effects": [uio.matrix_to_json(0.6 * np.eye(2))] * 2}
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text(json.dumps(bad))
    paths["mal"] = tmp_path / "mal.json"
    paths["mal"].write_text("{not json")
    paths["tmp"] = tmp_path
    return {k: str(v) for k, v in paths.items()}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_exit_codes(capsys, files):
    assert run(capsys, "validate", "--input", files["ex1"])[0] == 0
    code, _, err = run(capsys, "validate", "--input", files["bad"])
    assert code == 1 and "completeness" in err
    assert run(capsys, "validate", "--input", files["mal"])[0] == 2
    assert run(capsys, "validate", "--input", files["tmp"] + "/missing.json")[0] == 2
    assert run(capsys, "validate")[0] == 2


def test_usage_errors(capsys, files):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "scan", "--trials", "10")[0] == 2
    assert run(capsys, "simulate", "--input", files["w"], "--shots", "10", "--seed", "1", "--format", "csv")[0] == 2
    assert run(capsys, "sweep", "--input", files["w"], "--lambda-steps", "1")[0] == 2
    assert run(capsys, "estimate", "--input", files["w"], "--shots", "0", "--seed", "1")[0] == 2
    assert run(capsys, "grid", "--resolution", "1")[0] == 2


def test_domain_errors(capsys, files):
    assert run(capsys, "fuzzify", "--input", files["w"], "--lambda", "1.5")[0] == 1
    assert run(capsys, "estimate", "--input", files["ex1"], "--shots", "10", "--seed", "1")[0] == 1


def test_measures_matches_library(capsys, files):
    code, out, _ = run(capsys, "measures", "--input", files["ex1"])
    assert code == 0
    assert out == uio.dumps(measure_report(povm_example1()).to_dict())
    rep = json.loads(out)
    assert rep["eL"] == pytest.approx(0.5) and rep["eLprime"] == pytest.approx(7 / 24)


def test_measures_examples(capsys, files):
    rep = json.loads(run(capsys, "measures", "-i", files["t3"])[1])
    for k in ("eL", "eLprime", "e", "eprime"):
        assert rep[k] == pytest.approx(2 / 3, abs=1e-12)
    rep = json.loads(run(capsys, "measures", "-i", files["z"])[1])
    assert rep["is_pvm"] is True and rep["eL"] == 0


def test_measures_csv(capsys, files):
    out = run(capsys, "measures", "-i", files["ex1"], "--format", "csv")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["eL"]) == 0.5


def test_fuzzify_output_is_povm(capsys, files, tmp_path):
    target = tmp_path / "fz.json"
    assert run(capsys, "fuzzify", "-i", files["w"], "--lambda", "0.5", "-o", str(target))[0] == 0
    fz = uio.load_povm(target)
    np.testing.assert_allclose(fz[0], 0.5 * np.diag([0.8, 0.3]) + 0.25 * np.eye(2))


def test_sweep_matches_library(capsys, files):
    out = run(capsys, "sweep", "-i", files["ex1"], "--lambda-steps", "11", "--format", "csv")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    lib = lambda_sweep(povm_example1(), np.linspace(1, 0, 11).tolist())
    assert [float(r["eL"]) for r in rows] == [r.eL for r in lib]
    assert list(rows[0]) == ["lambda", "eL", "eLprime", "e", "eprime", "gamma"]


def test_grid_csv_minimum(capsys):
    out = run(capsys, "grid", "--resolution", "101", "--format", "csv")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 101 * 102 // 2
    assert min(float(r["sigma_min"]) for r in rows) >= -1e-12
    assert min(float(r["sigma_min_prime"]) for r in rows) >= -1e-12


def test_grid_json_summary(capsys):
    rep = json.loads(run(capsys, "grid", "--resolution", "21")[1])
    assert rep["seam_max_gap"] <= 1e-12 and len(rep["points"]) == 231


def test_simulate_echoes_seed(capsys, files):
    args = ("simulate", "-i", files["w"], "--shots", "5000", "--seed", "3", "--instrument", "jmax")
    first = run(capsys, *args)[1]
    rep = json.loads(first)
    assert rep["seed"] == 3 and rep["exact"] == pytest.approx(0.755)
    assert first == run(capsys, *args, "--workers", "4")[1]
    pure = json.loads(run(capsys, "simulate", "-i", files["z"], "--shots", "50", "--seed", "1", "--state", "z+")[1])
    assert pure["repeat_count"] == 50


def test_simulate_state_file(capsys, files, tmp_path):
    state = tmp_path / "rho.json"
    state.write_text(uio.dumps(uio.state_to_dict(np.diag([0.25, 0.75]))))
    rep = json.loads(run(capsys, "simulate", "-i", files["z"], "--shots", "10", "--seed", "1", "--state", str(state))[1])
    assert rep["repeat_count"] == 10
    state.write_text(uio.dumps(uio.state_to_dict(np.diag([0.5, 0.75]))))
    assert run(capsys, "simulate", "-i", files["z"], "--shots", "10", "--seed", "1", "--state", str(state))[0] == 1


def test_estimate_matches_library(capsys, files):
    out = run(capsys, "estimate", "-i", files["t2"], "--shots", "20000", "--seed", "7")[1]
    assert out == uio.dumps(estimate_qubit_e_matrix(trivial_observable(2, 2), 20000, 7).to_dict())
    assert json.loads(out)["seed"] == 7


def test_estimate_trivial_megashot(capsys, files):
    rep = json.loads(run(capsys, "estimate", "-i", files["t2"], "--shots", "1000000", "--seed", "7")[1])
    assert 0.49 <= rep["estimated_eL"] <= 0.51


def test_scan_byte_identical(capsys):
    args = ("scan", "--trials", "1000", "--seed", "1")
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    c = run(capsys, *args, "--workers", "2")[1]
    assert a == b == c
    assert a == uio.dumps(conjecture_scan([2, 3, 4], 1000, 1).to_dict())
    assert json.loads(a)["seed"] == 1


def test_scan_n_values_parsing(capsys):
    rep = json.loads(run(capsys, "scan", "--trials", "5", "--seed", "0", "--n-values", "2,5")[1])
    assert rep["n_values"] == [2, 5]
    assert run(capsys, "scan", "--trials", "5", "--seed", "0", "--n-values", "a")[0] == 2


def test_console_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "unsharp.cli", "validate", "--input", files["bad"]],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
