import json
import os
import subprocess
import sys

import numpy as np
import pytest

from gmoments.cli import main
from gmoments.estimators import isserlis_tensor
from gmoments.gaussian import make_covariance, sample, save_matrix_csv
from gmoments.tensor import load_tensor, save_tensor
from tests.conftest import config_path


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out


class TestEstimate:
    def test_simulated_symmetric(self, tmp_path, capsys):
        out = tmp_path / "t.tensor"
        code, stdout = run_cli([
            "estimate", "--family", "toeplitz", "--dim", "3", "--param", "rho=0.5",
            "--n", "200", "--seed", "9", "--order", "4",
            "--estimator", "isserlis", "--out", str(out)], capsys)
        assert code == 0
        meta = json.loads(stdout)
        assert meta["shape"] == [3, 3, 3, 3]
        batch = sample(make_covariance("toeplitz", 3, rho=0.5), 200, seed=9)
        from gmoments.estimators import isserlis_estimator_symmetric
        want = isserlis_estimator_symmetric(batch, 4).tensor
        assert np.array_equal(load_tensor(out), want)

    def test_from_csv_with_blocks(self, tmp_path, capsys):
        data = sample(make_covariance("identity", 4), 50, seed=2).data
        csv_path = tmp_path / "x.csv"
        save_matrix_csv(data, csv_path)
        out = tmp_path / "t.tensor"
        code, _ = run_cli([
            "estimate", "--input", str(csv_path), "--blocks", "2,2",
            "--estimator", "sample", "--out", str(out)], capsys)
        assert code == 0
        assert load_tensor(out).shape == (2, 2)

    def test_deterministic_rerun(self, tmp_path, capsys):
        args = ["estimate", "--family", "identity", "--dim", "2", "--n", "100",
                "--seed", "4", "--order", "2", "--estimator", "sample"]
        out1, out2 = tmp_path / "a.tensor", tmp_path / "b.tensor"
        run_cli(args + ["--out", str(out1)], capsys)
        run_cli(args + ["--out", str(out2)], capsys)
        assert out1.read_bytes() == out2.read_bytes()


class TestEffectiveDim:
    def test_json_output_matches_api(self, capsys):
        code, stdout = run_cli([
            "effective-dim", "--family", "identity", "--dim", "4",
            "--mc-samples", "20000", "--seed", "3"], capsys)
        assert code == 0
        got = json.loads(stdout)
        from gmoments.effective_dim import max_norm_effective_dim
        want = max_norm_effective_dim(make_covariance("identity", 4), 20000, seed=3)
        assert got == want.to_json()
        assert got["r2"] == 4.0


class TestCheckBounds:
    def test_relative_bound(self, tmp_path, capsys):
        x = np.array([[2.0]])
        y = np.array([[1.0]])
        save_matrix_csv(x, tmp_path / "x.csv")
        save_matrix_csv(y, tmp_path / "y.csv")
        code, stdout = run_cli([
            "check-bounds", "--covx", str(tmp_path / "x.csv"),
            "--covy", str(tmp_path / "y.csv"), "--order", "4", "--norm", "max"], capsys)
        assert code == 0
        rep = json.loads(stdout)
        assert rep["lhs"] == pytest.approx(3.0) and rep["rhs"] == pytest.approx(4.0)
        assert rep["satisfied"] and rep["lhs_method"] == "exact"

    def test_block_bound(self, tmp_path, capsys):
        y = np.eye(4)
        x = np.eye(4) + 0.1
        save_matrix_csv(x, tmp_path / "x.csv")
        save_matrix_csv(y, tmp_path / "y.csv")
        code, stdout = run_cli([
            "check-bounds", "--covx", str(tmp_path / "x.csv"),
            "--covy", str(tmp_path / "y.csv"), "--order", "2",
            "--blocks", "2,2", "--norm", "op"], capsys)
        assert code == 0
        rep = json.loads(stdout)
        assert rep["norm"] == "operator" and rep["lhs_method"] == "hopm_lower_bound"
        assert rep["satisfied"]


class TestTensorNorm:
    def test_max_and_op(self, tmp_path, capsys):
        t = isserlis_tensor(np.eye(2), p=4)
        path = tmp_path / "t.tensor"
        save_tensor(t, path)
        code, stdout = run_cli(["tensor-norm", "--input", str(path), "--norm", "max"], capsys)
        assert code == 0 and json.loads(stdout)["value"] == 3.0
        code, stdout = run_cli(["tensor-norm", "--input", str(path), "--norm", "op"], capsys)
        assert code == 0
        assert json.loads(stdout)["value"] == pytest.approx(3.0, rel=1e-6)


class TestExperiment:
    def test_quick_config_runs(self, tmp_path, capsys):
        code, stdout = run_cli([
            "experiment", "--config", config_path("quick_smoke.json"),
            "--out", str(tmp_path / "run")], capsys)
        assert code == 0
        csv_text = (tmp_path / "run" / "results.csv").read_text()
        assert csv_text.startswith("estimator,norm,N,trials,mean_error,stderr,"
                                   "r2,r_max,r_max_stderr,theory_rate,ratio\n")
        sidecar = json.loads((tmp_path / "run" / "results.json").read_text())
        assert sidecar["config"]["dim"] == 4
        assert sidecar["version"]

    def test_failing_check_exits_2(self, tmp_path, capsys):
        cfg = json.load(open(config_path("quick_smoke.json")))
        # impossible ordering: sample below isserlis at every N
        cfg["checks"] = {"error_ordering": [
            {"smaller": "sample", "larger": "isserlis", "norm": "max"}]}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code, _ = run_cli(["experiment", "--config", str(cfg_path),
                           "--out", str(tmp_path / "run")], capsys)
        assert code == 2

    def test_missing_config_exits_1(self, tmp_path, capsys):
        code = main(["experiment", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "run")])
        capsys.readouterr()
        assert code == 1


def test_console_entry_point(tmp_path):
    # the installed script must work in a fresh interpreter
    out = subprocess.run(
        [sys.executable, "-m", "gmoments.cli", "effective-dim", "--family",
         "identity", "--dim", "2", "--mc-samples", "10000", "--seed", "1"],
        capture_output=True, text=True, env=dict(os.environ))
    assert out.returncode == 0
    assert json.loads(out.stdout)["r2"] == 2.0
