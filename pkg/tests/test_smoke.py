import copy
import json
import re


def test_degree_command(runner):
    """Test that a map's degree prints."""
    result = runner.invoke(args=["degree", "--map", "[Y*Z : X*Z : X*Y]"])
    assert result.exit_code == 0
    assert "degree: 2" in result.output


def test_degree_reduces(runner):
    result = runner.invoke(args=["degree", "--map", "[X^2*Z : X*Y*Z : X*Z^2]"])
    assert result.exit_code == 0
    assert "[X : Y : Z]" in result.output
    assert "degree: 1" in result.output


def test_compose_command(runner):
    """Test composing the standard involution with itself."""
    sigma = "[Y*Z : X*Z : X*Y]"
    result = runner.invoke(args=["compose", "--f", sigma, "--g", sigma])
    assert result.exit_code == 0
    assert "degree: 1" in result.output
    assert "raw degree: 4" in result.output


def test_compose_over_cap(runner):
    h = "[Y*Z + X^2 : X*Z : Z^2]"
    result = runner.invoke(args=["compose", "--f", h, "--g", h, "--max-degree", "3"])
    assert result.exit_code == 1
    assert "exceeds the degree cap" in result.output


def test_parse_error_exit_status(runner):
    """Malformed input exits with status 2."""
    result = runner.invoke(args=["degree", "--map", "[X : Y]"])
    assert result.exit_code == 2
    assert "error:" in result.output


def test_dyndeg_map(runner):
    result = runner.invoke(args=["dyndeg", "--map", "[X*Y : X*Z : Z^2]", "--budget", "10"])
    assert result.exit_code == 0
    assert "lambda1: 1.64375" in result.output
    assert "route: fekete" in result.output
    assert "exact: no" in result.output


def test_dyndeg_config(runner, write_config, henon_config):
    path = write_config(henon_config)
    result = runner.invoke(args=["dyndeg", "--config", path, "--word", "h h"])
    assert result.exit_code == 0
    assert "lambda1: 4.000000000" in result.output
    assert "exact: yes" in result.output


def test_dyndeg_needs_a_target(runner):
    result = runner.invoke(args=["dyndeg"])
    assert result.exit_code == 2


def test_walk_to_stdout(runner, write_config, henon_config):
    path = write_config(henon_config)
    result = runner.invoke(args=["walk", "--config", path, "--trials", "3", "--length", "20"])
    assert result.exit_code == 0
    assert "trial,step,log_deg" in result.output
    rows = [line for line in result.output.splitlines() if re.match(r"\d+,20,", line)]
    assert len(rows) == 3


def test_walk_to_file(runner, write_config, henon_config, tmp_path):
    path = write_config(henon_config)
    target = tmp_path / "walks" / "t.csv"
    result = runner.invoke(args=["walk", "--config", path, "--trials", "2", "--out", str(target)])
    assert result.exit_code == 0
    assert target.read_text(encoding="utf-8").startswith("trial,step,log_deg")


def test_walk_reports_failure_count(runner, write_config, henon_config):
    config = copy.deepcopy(henon_config)
    config["measure"]["atoms"] = [{"generator": "h", "weight": 1}]
    config["walk"].update({"backend": "symbolic", "length": 5, "checkpoints": [5], "trials": 3})
    config["thresholds"]["degree_cap"] = 8
    result = runner.invoke(args=["walk", "--config", write_config(config)])
    assert result.exit_code == 1
    assert "failed trials: 3" in result.output
    assert "failed at step 4" in result.output


def test_clt_command(runner, write_config, henon_config, tmp_path):
    path = write_config(henon_config)
    out = tmp_path / "clt"
    result = runner.invoke(args=["clt", "--config", path, "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert result.exit_code == (0 if summary["passed"] else 1)
    assert "predicted law: FoldedGaussian (lineal)" in result.output
    assert (out / "histogram.csv").exists()


def test_clt_missing_config(runner, tmp_path):
    result = runner.invoke(args=["clt", "--config", str(tmp_path / "nope.json")])
    assert result.exit_code == 3


def test_clt_bad_config(runner, write_config, henon_config):
    henon_config["measure"]["atoms"][1]["weight"] = "1/3"
    result = runner.invoke(args=["clt", "--config", write_config(henon_config)])
    assert result.exit_code == 2
    assert "measure.atoms" in result.output


def test_verify_command(runner):
    result = runner.invoke(args=["verify", "table"])
    assert result.exit_code == 0
    assert "suite: table" in result.output
    assert "counterexamples: 0" in result.output


def test_verify_unknown_suite(runner):
    result = runner.invoke(args=["verify", "everything"])
    assert result.exit_code == 2
