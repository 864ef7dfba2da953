import json

import numpy as np
import pytest

from sympearson.cli import main
from sympearson.estimation import HuberM
from sympearson.pearson import run_test
from sympearson.timeseries import SeriesSample


@pytest.fixture
def series(tmp_path):
    path = tmp_path / "series.csv"
    code = main(["simulate", "--model-beta", "0.5,-0.3", "--mu", "1", "--n", "2000", "--seed", "7", "--out", str(path)])
    assert code == 0
    return path


def test_simulate_writes_csv(series):
    lines = series.read_text().splitlines()
    assert lines[0] == "t,y,v,z,xi"
    assert len(lines) == 1 + 2002
    assert lines[1].startswith("-1,")


def test_simulate_reproducible(tmp_path, series):
    again = tmp_path / "again.csv"
    main(["simulate", "--model-beta", "0.5,-0.3", "--mu", "1", "--n", "2000", "--seed", "7", "--out", str(again)])
    assert again.read_bytes() == series.read_bytes()


def test_test_command_schema_and_exit(series, tmp_path):
    out = tmp_path / "report.json"
    code = main(["test", str(series), "--p", "2", "--out", str(out)])
    report = json.loads(out.read_text())
    assert code == (2 if report["reject"] else 0)
    for key in ("theta_hat", "nu", "statistic", "df", "critical_value", "alpha", "reject", "p_value", "estimator", "partition", "warnings"):
        assert key in report
    assert report["df"] == 4 and report["alpha"] == 0.05


def test_round_trip_matches_library(series, tmp_path, capsys):
    main(["test", str(series), "--p", "2", "--estimator", "huber"])
    cli_report = json.loads(capsys.readouterr().out)
    lib = run_test(SeriesSample.from_csv(series), 2, HuberM(), None, 0.05)
    assert cli_report == json.loads(lib.to_json())


def test_rejection_exit_code(tmp_path):
    path = tmp_path / "laplace.csv"
    main(["simulate", "--model-beta", "0.5", "--innovation", "laplace", "--n", "5000", "--seed", "1", "--out", str(path)])
    assert main(["test", str(path), "--p", "1"]) == 2


def test_fixed_partition_file(series, tmp_path, capsys):
    part = tmp_path / "part.json"
    part.write_text("[0.25, 0.5, 0.75, 1.0, 1.5]")
    assert main(["test", str(series), "--p", "2", "--partition", str(part)]) in (0, 2)
    report = json.loads(capsys.readouterr().out)
    assert report["partition"] == [0.25, 0.5, 0.75, 1.0, 1.5] and report["warnings"] == []


def test_invalid_partition(series, tmp_path, capsys):
    part = tmp_path / "bad.json"
    part.write_text("[1.0, 0.5]")
    assert main(["test", str(series), "--p", "2", "--partition", str(part)]) == 1
    assert "increasing" in capsys.readouterr().err


def test_malformed_csv_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,y\n1,0.1\n2,0.2\n3,oops\n")
    assert main(["test", str(bad), "--p", "0"]) == 1
    assert "line 4" in capsys.readouterr().err


def test_usage_error_is_not_rejection(capsys):
    with pytest.raises(SystemExit) as info:
        main(["test"])
    assert info.value.code == 1


def test_theory_gamma_zero(capsys):
    assert main(["theory", "--gamma", "0", "--model-beta", "0.5,-0.3", "--pi", "pointmass:5", "--alpha", "0.05"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["asymptotic_level"] - 0.05) < 1e-10
    assert out["lambda2"] == 0.0
    assert len(out["delta"]) == 6


def test_theory_curve(capsys):
    main(["theory", "--model-beta", "0.5", "--pi", "cauchy:0,1", "--curve", "0,0.5,1", "--seed", "3"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "gamma,level" and len(lines) == 4
    levels = [float(l.split(",")[1]) for l in lines[1:]]
    assert levels == sorted(levels)


@pytest.fixture
def config(tmp_path):
    cfg = {
        "model": {"beta": [0.5, -0.3], "mu": 1.0},
        "contamination": {"gamma": 1.0, "pi": {"law": "pointmass", "c": 3.0}},
        "n": 300,
        "replications": 12,
        "seed": 5,
        "gammas": [0.5, 0.0],
        "pis": ["pointmass:3", {"law": "cauchy", "location": 0.0, "scale": 1.0}],
        "x_grid": [0.5, 1.0],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_mc_level_outputs(config, tmp_path):
    out, samples = tmp_path / "r.json", tmp_path / "s.csv"
    assert main(["mc-level", str(config), "--out", str(out), "--samples-out", str(samples)]) == 0
    res = json.loads(out.read_text())
    assert res["spec"]["replications"] == 12 and 0 <= res["rejection_rate"] <= 1
    assert len(samples.read_text().splitlines()) == 1 + res["completed"]


def test_mc_level_seed_override_reproducible(config, tmp_path):
    a, b, c = (tmp_path / f"{k}.json" for k in "abc")
    main(["mc-level", str(config), "--seed", "11", "--out", str(a)])
    main(["mc-level", str(config), "--seed", "11", "--workers", "2", "--out", str(b)])
    main(["mc-level", str(config), "--seed", "12", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_expansion_check_command(config, capsys):
    assert main(["expansion-check", str(config), "--reps", "20"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["x"] for r in out["rows"]] == [0.5, 1.0]


def test_sweep_command(config, tmp_path, capsys):
    curve = tmp_path / "curve.csv"
    assert main(["robustness-sweep", str(config), "--theory-only", "--curve-out", str(curve)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["empirical_level"] is None
    assert out["theory_level"][1] == pytest.approx([0.05, 0.05], abs=1e-10)
    assert curve.read_text().startswith("gamma,level\n")
