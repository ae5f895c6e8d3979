"""End-to-end tests for the jhl command line and its run configuration."""

import json
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

import jhl.quadrature
from jhl.cli import main
from jhl.config import RunConfig, load_config
from jhl.errors import ConfigError
from jhl.semigroup import clear_caches


def _base_config(**overrides):
    cfg = {
        "params": [[0.0, 0.0]],
        "sizes": [8, 12],
        "t_grid": {"t_min": 1e-2, "t_max": 10.0, "count": 16},
        "norms_t_grid": {"t_min": 1e-2, "t_max": 100.0, "count": 16},
        "lacunary": {"ratio": 2.0, "window": 2},
        "lambdas": [0.25, 1.0],
        "p_values": [2.0],
        "weights": [{"kind": "constant"}],
        "kernel_times": [1e-12, 1.0],
        "estimates": ["poly_bound"],
        "operators": ["variation"],
    }
    cfg.update(overrides)
    return cfg


def _write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _read_matrix(path, size):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    mat = np.zeros((size, size))
    mat[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2]
    return mat


class TestConfig:
    def test_round_trip(self):
        default = RunConfig()
        rebuilt = RunConfig.from_dict(default.to_dict())
        assert rebuilt == default
        assert rebuilt.to_dict() == default.to_dict()

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            RunConfig.from_dict({"sizes": [8, 12], "verbosity": 3})
        with pytest.raises(ConfigError, match="unknown keys"):
            RunConfig.from_dict({"t_grid": {"t_min": 0.1, "t_max": 1.0, "points": 4}})

    def test_value_validation(self):
        with pytest.raises(ConfigError, match="increasing"):
            RunConfig.from_dict({"sizes": [12, 8]})
        with pytest.raises(ConfigError, match="at least 1"):
            RunConfig.from_dict({"p_values": [0.5]})
        with pytest.raises(ConfigError, match="seed"):
            RunConfig.from_dict({"seed": 2 ** 64})
        with pytest.raises(ConfigError, match="integer"):
            RunConfig.from_dict({"seed": "zero"})
        with pytest.raises(ConfigError, match="list"):
            RunConfig.from_dict({"sizes": "all"})
        with pytest.raises(ConfigError, match="list"):
            RunConfig.from_dict({"lambdas": 0.5})
        with pytest.raises(ConfigError, match="kernel_times"):
            RunConfig.from_dict({"kernel_times": [0.0, 1.0]})
        with pytest.raises(ConfigError, match="estimates"):
            RunConfig.from_dict({"estimates": ["kernel_decay", "sharpness"]})

    def test_load_config(self, tmp_path):
        path = _write_config(tmp_path, _base_config())
        config = load_config(path)
        assert config.sizes == (8, 12)
        assert config.p_values == (2.0,)

    def test_load_config_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmp_path / "missing.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="valid JSON"):
            load_config(str(bad))


class TestMainErrors:
    def test_bad_config_exits_two(self, tmp_path, capsys):
        path = _write_config(tmp_path, {"sizes": "all"})
        code = main(["verify", "--config", path])
        assert code == 2
        record = json.loads(capsys.readouterr().err)
        assert record["error"] == "config"
        assert record["message"]

    def test_bad_seed_override(self, tmp_path):
        path = _write_config(tmp_path, _base_config())
        assert main(["verify", "--config", path, "--seed", "-1"]) == 2

    def test_bad_worker_override(self, tmp_path):
        path = _write_config(tmp_path, _base_config())
        assert main(["verify", "--config", path, "--workers", "0"]) == 2

    def test_bad_worker_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("JHL_WORKERS", "many")
        path = _write_config(tmp_path, _base_config(out_dir=str(tmp_path / "o")))
        assert main(["verify", "--config", path]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "config"

    def test_numeric_failure_exits_three(self, tmp_path, monkeypatch, capsys):
        clear_caches()
        monkeypatch.setattr(jhl.quadrature, "MAX_ORDER", 8)
        path = _write_config(tmp_path, _base_config(
            out_dir=str(tmp_path / "o"), quad_tol=1.1e-12))
        code = main(["kernel", "--config", path])
        clear_caches()
        assert code == 3
        assert json.loads(capsys.readouterr().err)["error"] == "numeric"


class TestKernelCommand:
    def test_outputs_and_identity(self, tmp_path):
        out = tmp_path / "run"
        path = _write_config(tmp_path, _base_config(out_dir=str(out)))
        assert main(["kernel", "--config", path]) == 0
        tag = out / "kernel" / "alpha0_beta0"
        near_identity = _read_matrix(tag / "kernel_00.csv", 12)
        off = near_identity - np.eye(12)
        assert np.abs(off).max() < 1e-9
        report = json.loads((tag / "report.json").read_text())
        assert report["size"] == 12
        assert max(report["defects"]["cross_method"]) < 1e-8
        assert max(report["defects"]["markov"]) < 1e-8
        assert max(report["defects"]["semigroup"]) < 1e-8
        assert (out / "kernel" / "timings.json").exists()

    def test_reruns_are_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        p1 = _write_config(tmp_path, _base_config(out_dir=str(out1)), "c1.json")
        p2 = _write_config(tmp_path, _base_config(out_dir=str(out2)), "c2.json")
        assert main(["kernel", "--config", p1]) == 0
        assert main(["kernel", "--config", p2]) == 0
        for name in ("kernel_00.csv", "kernel_01.csv", "kernel_dt_00.csv",
                     "report.json"):
            a = (out1 / "kernel" / "alpha0_beta0" / name).read_bytes()
            b = (out2 / "kernel" / "alpha0_beta0" / name).read_bytes()
            assert a == b, name


class TestOperatorsCommand:
    def test_table_and_margin(self, tmp_path):
        out = tmp_path / "run"
        path = _write_config(tmp_path, _base_config(out_dir=str(out)))
        assert main(["operators", "--config", path]) == 0
        table = out / "operators" / "alpha0_beta0" / "operators.csv"
        header = table.read_text().splitlines()[0].split(",")
        assert header[:3] == ["n", "variation", "oscillation"]
        assert header[-2:] == ["s_star", "margin"]
        assert "jump_lam0.25" in header and "jump_lam1" in header
        data = np.loadtxt(table, delimiter=",", skiprows=1)
        assert data.shape[0] == 12
        assert np.all(data[:, -1] >= 0.0)
        report = json.loads(
            (out / "operators" / "alpha0_beta0" / "report.json").read_text())
        assert report["min_margin"] >= 0.0
        assert 0 <= report["argmax_variation"] < 12

    def test_empty_signal_writes_header_only(self, tmp_path):
        out = tmp_path / "run"
        cfg = _base_config(out_dir=str(out),
                           signal={"kind": "explicit", "values": []})
        path = _write_config(tmp_path, cfg)
        assert main(["operators", "--config", path]) == 0
        lines = (out / "operators" / "alpha0_beta0" /
                 "operators.csv").read_text().splitlines()
        assert len(lines) == 1

    def test_oversized_signal_rejected(self, tmp_path):
        cfg = _base_config(out_dir=str(tmp_path / "o"),
                           signal={"kind": "explicit", "values": [1.0] * 13})
        path = _write_config(tmp_path, cfg)
        assert main(["operators", "--config", path]) == 2


class TestVerifyCommand:
    def test_summary_and_reports(self, tmp_path):
        out = tmp_path / "run"
        path = _write_config(tmp_path, _base_config(out_dir=str(out)))
        assert main(["verify", "--config", path]) == 0
        base = out / "verify"
        lines = (base / "summary.csv").read_text().splitlines()
        assert lines[0] == "estimate,alpha,beta,verdict,constant,stability_ratio"
        assert len(lines) == 3  # one estimate cell plus the negative control
        assert lines[-1].startswith("negative_control,")
        report = json.loads((base / "alpha0_beta0" / "poly_bound.json").read_text())
        assert "runtime" not in report
        assert report["verdict"] in ("stable", "growing")
        control = json.loads((base / "negative_control.json").read_text())
        assert control["name"] == "theorem_norms_variation"
        assert json.loads((base / "timings.json").read_text())["cells"]

    def test_parallel_matches_sequential(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        p1 = _write_config(tmp_path, _base_config(out_dir=str(out1)), "c1.json")
        p2 = _write_config(tmp_path, _base_config(out_dir=str(out2)), "c2.json")
        assert main(["verify", "--config", p1]) == 0
        assert main(["verify", "--config", p2, "--workers", "2"]) == 0
        a = (out1 / "verify" / "summary.csv").read_bytes()
        b = (out2 / "verify" / "summary.csv").read_bytes()
        assert a == b


class TestNormsCommand:
    def test_table_layout(self, tmp_path):
        out = tmp_path / "run"
        path = _write_config(tmp_path, _base_config(out_dir=str(out)))
        assert main(["norms", "--config", path]) == 0
        lines = (out / "norms" / "norms.csv").read_text().splitlines()
        assert lines[0] == ("params,operator,p,weight,size,norm_estimate,"
                            "weak11_estimate,stability_ratio")
        # one params x one operator x (configured pair + critical-power pair)
        # x two sizes
        assert len(lines) == 5
        body = [line.split(",") for line in lines[1:]]
        assert body == sorted(body, key=lambda r: (r[0], r[1], float(r[2]),
                                                   r[3], int(r[4])))
        weights_seen = {row[3] for row in body}
        assert weights_seen == {"const", "pow2"}
        assert all(float(row[5]) > 0.0 and float(row[6]) > 0.0 for row in body)

    def test_pairing_mismatch_rejected(self, tmp_path):
        cfg = _base_config(out_dir=str(tmp_path / "o"), p_values=[2.0, 1.5])
        path = _write_config(tmp_path, cfg)
        assert main(["norms", "--config", path]) == 2

    def test_env_parallelism_is_deterministic(self, tmp_path, monkeypatch):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        p1 = _write_config(tmp_path, _base_config(out_dir=str(out1)), "c1.json")
        p2 = _write_config(tmp_path, _base_config(out_dir=str(out2)), "c2.json")
        assert main(["norms", "--config", p1]) == 0
        monkeypatch.setenv("JHL_WORKERS", "2")
        assert main(["norms", "--config", p2]) == 0
        a = (out1 / "norms" / "norms.csv").read_bytes()
        b = (out2 / "norms" / "norms.csv").read_bytes()
        assert a == b
