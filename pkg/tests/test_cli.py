import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sharedpurity import cli
from sharedpurity.states import DensityOperator, PureState, random_density, save_state
from sharedpurity.xy import lambda_grid

S2 = 1 / np.sqrt(2)


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def singlet_file(tmp_path):
    path = tmp_path / "singlet.json"
    save_state(PureState((2, 2), [0, S2, -S2, 0]).density(), path)
    return path


# --- state ------------------------------------------------------------------

def test_state_singlet(singlet_file, capsys):
    code, out, _ = run(["state", singlet_file], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["f_global"] == pytest.approx(1.0, abs=1e-12)
    assert res["f_local"] == pytest.approx(0.5, abs=1e-10)
    assert res["s_p"] == pytest.approx(0.5, abs=1e-10)
    assert res["diagnostics"]["converged"] is True


def test_state_maximally_mixed(tmp_path, capsys):
    path = tmp_path / "mm.json"
    save_state(DensityOperator.maximally_mixed((2, 2)), path)
    code, out, _ = run(["state", path], capsys)
    assert code == 0
    assert abs(json.loads(out)["s_p"]) <= 1e-12


def test_state_pure_vector_file_ngen(tmp_path, capsys):
    path = tmp_path / "w.json"
    save_state(PureState((2, 2, 2), np.array([0, 1, 1, 0, 1, 0, 0, 0]) / np.sqrt(3)), path)
    code, out, _ = run(["state", path, "--variant", "ngen"], capsys)
    assert code == 0
    assert json.loads(out)["s_p"] == pytest.approx(1 / 3, abs=1e-10)


def test_state_bad_trace(tmp_path, capsys):
    path = tmp_path / "bad.json"
    m = np.eye(4) * 0.9 / 4
    path.write_text(json.dumps({"dims": [2, 2], "matrix": [[x, 0.0] for x in m.ravel()]}))
    code, _, err = run(["state", path], capsys)
    assert code == 1
    assert "unit-trace" in err


@pytest.mark.parametrize("text, invariant", [("{oops", "format"),
                                             ('{"dims": [2], "matrix": [[1, 0]]}', "shape")])
def test_state_malformed(tmp_path, capsys, text, invariant):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, _, err = run(["state", path], capsys)
    assert code == 1
    assert invariant in err


def test_state_missing_file(tmp_path, capsys):
    code, _, err = run(["state", tmp_path / "nope.json"], capsys)
    assert code == 1
    assert "file" in err


def test_state_not_converged(tmp_path, capsys):
    path = tmp_path / "r.json"
    save_state(random_density((3, 3, 3), seed=2), path)
    code, out, _ = run(["state", path, "--max-sweeps", 1, "--tol", 1e-300], capsys)
    assert code == 2
    assert json.loads(out)["converged"] is False


# --- family sweeps ----------------------------------------------------------

def _sweep_rows(argv, capsys):
    code, out, err = run(argv, capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    return code, rows, err


def test_family_sweep_admixture(capsys):
    code, rows, err = _sweep_rows(["family-sweep", "bell_product_admixture",
                                   "--range", "p=0:1", "--points", 101], capsys)
    assert code == 0
    assert len(rows) == 101
    assert max(float(r["gap"]) for r in rows) <= 1e-6
    assert "max |gap|" in err
    s = {round(float(r["p"]), 2): float(r["s_p"]) for r in rows}
    assert all(v <= 1e-9 for p, v in s.items() if p >= 0.5)
    assert all(v > 0 for p, v in s.items() if p < 0.5)


def test_family_sweep_bell_mixture_v_shape(capsys):
    code, rows, _ = _sweep_rows(["family-sweep", "bell_mixture", "--range", "p=0:1"], capsys)
    assert code == 0
    s = np.array([float(r["s_p"]) for r in rows])
    assert np.argmin(s) == 50
    assert s[50] <= 1e-9
    assert np.all(np.diff(s[:51]) < 0) and np.all(np.diff(s[50:]) > 0)


def test_family_sweep_noisy_ghz_endpoint(capsys):
    code, rows, _ = _sweep_rows(["family-sweep", "noisy_ghz_n", "--set", "p=0", "--set", "d=2",
                                 "--set", "N=3"], capsys)
    assert code == 0
    assert len(rows) == 1
    assert abs(float(rows[0]["s_p"])) <= 1e-12


def test_family_sweep_pi_syntax(capsys):
    code, rows, _ = _sweep_rows(["family-sweep", "noisy_pure", "--set", "theta=pi/4",
                                 "--range", "p=0:1", "--points", 5], capsys)
    assert code == 0
    assert float(rows[0]["theta"]) == pytest.approx(math.pi / 4)


def test_family_sweep_bad_parameters(capsys):
    code, _, err = run(["family-sweep", "bell_mixture", "--range", "p=0:2"], capsys)
    assert code == 1
    assert "parameter-range" in err
    code, _, err = run(["family-sweep", "bell_mixture", "--range", "p=zero:1"], capsys)
    assert code == 1


def test_family_sweep_gap_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli.families, "oracle_shared_purity", lambda spec: 1.0)
    code, _, _ = run(["family-sweep", "bell_mixture", "--range", "p=0:1", "--points", 3], capsys)
    assert code == 2


# --- monogamy ---------------------------------------------------------------

def test_monogamy_summary_fields(capsys):
    code, out, _ = run(["monogamy", "ghz_class", 10000, "--seed", 7], capsys)
    assert code == 0
    d = json.loads(out)
    f = d["fraction"]
    assert d["n_samples"] == 10000
    assert d["std_err"] == pytest.approx(math.sqrt(f * (1 - f) / 1e4), abs=1e-15)


def test_monogamy_writes_records(tmp_path, capsys):
    code, _, _ = run(["monogamy", "w_class", 100, "--seed", 3, "--squared",
                      "--out", tmp_path], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "records.csv").open()))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(rows) == 100
    assert summary["squared"] is True
    assert summary["n_non_monogamous"] == sum(r["monogamous_sq"] == "0" for r in rows)


def test_monogamy_rejects_small_n(capsys):
    code, _, _ = run(["monogamy", "w_class", 10], capsys)
    assert code == 1


# --- XY ---------------------------------------------------------------------

def test_xy_sweep_row_count(capsys):
    code, out, _ = run(["xy-sweep", "--gamma", 0.8, "--thermodynamic"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == len(lambda_grid(0.5, 1.5, 1e-3))
    assert rows[0]["n_sites"] == "inf"


def test_xy_sweep_requires_valid_ring(capsys):
    code, _, _ = run(["xy-sweep", "--gamma", 0.8, "--n-sites", 8], capsys)
    assert code == 1


def test_xy_scaling_defaults(capsys):
    code, out, _ = run(["xy-scaling", "--gamma", 0.8], capsys)
    d = json.loads(out)
    assert code in (0, 2)
    assert "residual" in d
    assert -1.55 <= d["slope"] <= -1.25


# --- reproducibility --------------------------------------------------------

def test_seed_from_environment(tmp_path, monkeypatch, capsys, singlet_file):
    monkeypatch.setenv(cli.SEED_ENV, "11")
    run(["state", singlet_file, "--out", tmp_path / "a"], capsys)
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert m["seed"] == 11
    assert m["config"]["seed"] == 11
    assert m["argv"][-2:] == ["--seed", "11"]
    monkeypatch.setenv(cli.SEED_ENV, "eleven")
    code, _, err = run(["state", singlet_file], capsys)
    assert code == 1 and "seed" in err


@pytest.mark.parametrize("argv", [
    ["monogamy", "generalized_w", 100, "--seed", 5],
    ["xy-sweep", "--gamma", 0.5, "--n-sites", 55, "--window", "0.9:1.1", "--step", 0.01],
    ["xy-scaling", "--n-list", "55,75,95", "--window", "0.9:1.05", "--step", 5e-3],
    ["family-sweep", "noisy_pure", "--range", "p=0:1", "--set", "theta=0.2", "--points", 7],
])
def test_manifest_replay_is_bit_exact(tmp_path, capsys, argv):
    out_dir = tmp_path / "run"
    code, _, _ = run(argv + ["--out", out_dir], capsys)
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    for key in ("argv", "config", "seed", "version", "inputs", "outputs", "duration_s"):
        assert key in manifest
    assert manifest["outputs"]
    code, out, _ = run(["replay", out_dir / "manifest.json", "--out", tmp_path / "again"], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["outputs_match"] and report["mismatched"] == []


def test_replay_state_checks_inputs(tmp_path, capsys, singlet_file):
    run(["state", singlet_file, "--out", tmp_path / "a"], capsys)
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["inputs"] == {str(singlet_file): cli.sha256_file(singlet_file)}
    code, out, _ = run(["replay", tmp_path / "a" / "manifest.json"], capsys)
    assert code == 0 and json.loads(out)["outputs_match"]
    save_state(DensityOperator.maximally_mixed((2, 2)), singlet_file)
    code, _, err = run(["replay", tmp_path / "a" / "manifest.json"], capsys)
    assert code == 1 and "manifest" in err


def test_module_entry_point(singlet_file):
    proc = subprocess.run([sys.executable, "-m", "sharedpurity", "state", str(singlet_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["s_p"] == pytest.approx(0.5, abs=1e-10)
