import csv
import json
import math

import numpy as np
import pytest

from fraclap.cli import CSV_COLUMNS, SCHEMA, RunConfig, UsageError, main


def _report(path):
    with open(path / "report.json") as fh:
        return json.load(fh)


def test_verify_ball(tmp_path):
    assert main(["verify-ball", "--n", "1", "--s", "1.5", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["schema"] == SCHEMA
    assert rep["checks"][0]["ingredients"]["max_error"] <= 1e-4


def test_pohozaev_2d(tmp_path):
    assert main(["pohozaev", "--n", "2", "--s", "1.5", "--mode", "analytic", "--out", str(tmp_path)]) == 0
    row = _report(tmp_path)["checks"][0]
    assert row["lhs"] == pytest.approx(-8 / 45, abs=1e-12)
    assert row["residual_abs"] <= 1e-10
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS and rows[1][-1] == "1"


def test_dilation(tmp_path):
    assert main(["dilation", "--A", "1", "--B", "0", "--out", str(tmp_path)]) == 0
    row = _report(tmp_path)["checks"][0]
    assert row["lhs"] == pytest.approx(math.pi ** 2, rel=1e-2)
    data = np.loadtxt(tmp_path / "lambda_convergence_dilation-A1-B0.dat")
    assert data.shape[1] == 2


def test_trace_fit_files(tmp_path):
    assert main(["trace-fit", "--s", "1.5", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert {f["fixture"] for f in rep["logfits"]} == {"ball", "halfline"}
    assert np.loadtxt(tmp_path / "trace_profile_ball_s1.5.dat").shape[1] == 2


def test_failing_check_exits_nonzero(tmp_path, capsys):
    code = main(["pohozaev", "--n", "1", "--s", "1.5", "--mode", "numeric", "--N", "256",
                 "--tol", "pohozaev-numeric=1e-9", "--out", str(tmp_path)])
    assert code == 1
    assert "pohozaev" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["verify-ball", "--s", "2.0"],
    ["verify-ball", "--n", "5"],
    ["scaling", "--N", "1000"],
    ["verify-ball", "--tol", "nope=1"],
    ["bogus"],
])
def test_usage_errors(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(argv + ["--out", str(tmp_path)] if argv[0] != "bogus" else argv)
    assert exc.value.code == 2


def test_config_file(tmp_path):
    cfg = {"command": "semilinear", "n": 2, "s": 1.5, "grid": {"L": 4.0, "N": 1024}, "output": str(tmp_path)}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert main(["semilinear", "--config", str(p)]) == 0
    assert _report(tmp_path)["config"]["grid"]["N"] == 1024
    with pytest.raises(UsageError):
        RunConfig.from_json(json.dumps({"command": "semilinear", "colour": 1}))


def test_repeatable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["eigen", "--s", "1.5", "--N", "256", "--out", str(tmp_path / "o")]) == 0
        (tmp_path / "o" / "report.json").rename(d.with_suffix(".json"))
    assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()


def test_domain_in_config(tmp_path):
    cfg = {"command": "pohozaev", "domain": {"kind": "ball", "n": 2, "radius": 1.0, "crossover": 0.2},
           "output": str(tmp_path)}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert main(["pohozaev", "--config", str(p)]) == 0
    rep = _report(tmp_path)
    assert rep["config"]["n"] == 2 and rep["config"]["domain"]["crossover"] == 0.2
    with pytest.raises(UsageError):
        RunConfig("solve", domain={"kind": "interval", "a": 0.0, "b": 3.0})
    with pytest.raises(SystemExit):
        main(["pohozaev", "--config", str(p), "--n", "1"])
