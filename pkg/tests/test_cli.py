import json

import pytest

from rkreg.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_valid_cell_run(self, capsys, tmp_path):
        out = tmp_path / "cell.csv"
        code, stdout, _ = run_cli(
            capsys, "coverage-cell", "--model", "cos", "--design", "std_normal",
            "--d", "1", "--n", "50", "--x", "-0.5", "--reps", "30",
            "--seed", "42", "--out", str(out),
        )
        assert code == 0
        text = out.read_text()
        assert text.startswith("model,design,d,n,x,estimator,coverage")
        assert "cosine,std_normal,1.0,50,-0.5,nw," in text
        assert "averaged" in text

    def test_malformed_json_config(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        code, _, err = run_cli(capsys, "coverage-cell", "--config", str(bad))
        assert code == 2
        assert "configuration error" in err

    def test_failing_assumptions(self, capsys, tmp_path):
        cfg = {
            "sequences": {
                "stepsize": {"scale": 1.0, "power": 0.9, "log_power": 0.0},
                "bandwidth": {"scale": 1.0, "power": 0.2, "log_power": -1.0},
                "weights": {"scale": 1.0, "power": 0.65, "log_power": 0.0},
                "density_stepsize": {"scale": 0.8, "power": 1.0, "log_power": 0.0},
            },
            "reps": 10,
            "n": 30,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code, _, err = run_cli(capsys, "coverage-cell", "--config", str(path))
        assert code == 2
        assert "weight_exponent_bound" in err

    def test_unknown_model(self, capsys):
        code, _, err = run_cli(capsys, "coverage-cell", "--model", "spline",
                               "--reps", "5", "--n", "20")
        assert code == 2

    def test_unknown_config_key(self, capsys, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"modle": "cosine"}))
        code, _, err = run_cli(capsys, "coverage-cell", "--config", str(path))
        assert code == 2
        assert "unknown config keys" in err

    def test_runtime_fault(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "coverage-cell", "--model", "cos", "--reps", "5",
            "--n", "20", "--out", str(tmp_path / "no_dir" / "x.csv"),
        )
        assert code == 1
        assert "error" in err


class TestValidateConfig:
    def test_reference_config_passes(self, capsys):
        code, stdout, _ = run_cli(capsys, "validate-config")
        assert code == 0
        assert "overall: pass" in stdout
        assert "contraction and density-stepsize checks: pass" in stdout

    def test_contraction_failure(self, capsys, tmp_path):
        cfg = {
            "sequences": {
                "stepsize": {"scale": 5.0, "power": 0.9, "log_power": 0.0},
                "bandwidth": {"scale": 1.0, "power": 0.2, "log_power": -1.0},
                "weights": {"scale": 1.0, "power": 0.2, "log_power": -1.0},
                "density_stepsize": {"scale": 0.8, "power": 1.0, "log_power": 0.0},
            }
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code, _, err = run_cli(capsys, "validate-config", "--config", str(path))
        assert code == 2
        assert "update weight" in err or "stepsize" in err


class TestDumpConfig:
    def test_round_trip(self, capsys, tmp_path):
        code, stdout, _ = run_cli(
            capsys, "coverage-cell", "--model", "linear", "--d", "2",
            "--n", "77", "--x=-0.5,0.5", "--dump-config",
        )
        assert code == 0
        dumped = json.loads(stdout)
        assert dumped["model"] == "linear"
        assert dumped["d"] == 2.0
        assert dumped["n"] == 77
        assert dumped["x"] == [-0.5, 0.5]
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(dumped))
        code2, stdout2, _ = run_cli(capsys, "coverage-cell", "--config", str(path),
                                    "--dump-config")
        assert code2 == 0
        assert json.loads(stdout2) == dumped


class TestConstants:
    def test_reference_constants(self, capsys):
        code, stdout, _ = run_cli(capsys, "constants", "--q", "0.2", "--a", "0.2")
        assert code == 0
        assert "variance factor             0.800000" in stdout
        assert "theoretical level (batch)   0.9500" in stdout
        assert "theoretical level (avg)     0.9716" in stdout

    def test_model_constants(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "constants", "--model", "cos", "--design", "std_normal",
            "--x", "0",
        )
        assert code == 0
        assert "bias constant" in stdout
        assert "averaged limit law" in stdout
        assert "batch variance" in stdout


class TestCltCheck:
    def test_quick_run(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "clt-check", "--model", "cos", "--design", "std_normal",
            "--x", "0", "--n", "400", "--reps", "40", "--clt-estimator", "nw",
        )
        assert code == 0
        assert "standardized var" in stdout

    def test_requires_single_point(self, capsys):
        code, _, err = run_cli(
            capsys, "clt-check", "--x=-0.5,0.5", "--n", "100", "--reps", "10",
        )
        assert code == 2


class TestThreadDeterminism:
    def test_cell_csv_identical_across_threads(self, capsys, tmp_path):
        outs = []
        for threads in ("1", "2"):
            out = tmp_path / f"t{threads}.csv"
            code, _, _ = run_cli(
                capsys, "coverage-cell", "--model", "cos", "--n", "50",
                "--reps", "40", "--seed", "7", "--threads", threads,
                "--out", str(out),
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
