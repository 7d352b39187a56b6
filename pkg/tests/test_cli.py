import json
import subprocess
import sys

import pytest

from weirflow.cli import evaluate_baseline, main


def test_generate_then_run(tmp_path, capsys):
    data = tmp_path / "data.csv"
    assert main(["generate", "--n", "40", "--mode", "bagheri", "--noise-sd", "0.01", "--seed", "7", "--out", str(data)]) == 0
    assert data.read_text().startswith("lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd\n")
    assert capsys.readouterr().out.startswith("wrote 40 samples")
    out = tmp_path / "results"
    code = main(
        ["run", "--data", str(data), "--models", "lr,cnn-gru,lr-cgru", "--folds", "5", "--seed", "7", "--epochs", "2", "--out", str(out)]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert printed.startswith("effective config:")
    echoed = json.loads(printed[len("effective config:") : printed.index("\n}") + 2])
    assert echoed["epochs"] == 2 and echoed["hybrid_strategy"] == "average" and echoed["folds"] == 5
    assert echoed["models"] == ["lr", "cnn-gru", "lr-cgru"]
    for name in ("metrics.csv", "predictions.csv", "timing.csv", "yy_lr.csv", "yy_cnn-gru.csv", "yy_lr-cgru.csv"):
        assert (out / name).exists(), name
    assert "lr-cgru" in printed and "ok" in printed


def test_run_from_config_file_is_reproducible(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"seed": 2, "models": ["lr", "knn", "cnn"], "epochs": 2, "synthetic": {"n": 30}}))
    for name in ("a", "b"):
        assert main(["run", "--config", str(config), "--single-thread", "--out", str(tmp_path / name)]) == 0
    for f in sorted(p.name for p in (tmp_path / "a").iterdir()):
        if f != "timing.csv":
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_baseline_prints_value(capsys):
    assert main(["baseline", "--eq", "bagheri", "--params", "lambda=1,h1=0.1,L=1,W=0.5"]) == 0
    value = float(capsys.readouterr().out.split("=")[1])
    assert value == pytest.approx(0.94673, abs=1e-4)


@pytest.mark.parametrize(
    "eq,params,label,expected,tol",
    [
        ("eq1", {"cd": 1.0, "B": 1.0, "H1": 1.0}, "Q", 1.704895, 1e-5),
        ("eq1", {"Q": 1.534405, "B": 1.0, "h1": 1.0}, "Cd", 0.9, 1e-5),
        ("eq1", {"cd": 0.9, "B": 1.0, "h1": 0.5, "v": 1.0}, "Q", 0.9 * 1.704895 * (0.5 + 1 / 19.62) ** 1.5, 1e-5),
        ("carollo", {"h1": 0.2, "W": 0.2, "L": 0.2, "W1": 0.2}, "Cd", 1.45137, 1e-4),
        ("stage", {"h1": 0.2, "W": 0.2, "L": 0.2, "W1": 0.2}, "A", 0.8546, 1e-12),
        ("stage", {"Q": 1.0, "b": 1.0, "W": 1.0, "g": 1.0}, "A", 1.0, 1e-12),
    ],
)
def test_evaluate_baseline(eq, params, label, expected, tol):
    got_label, value = evaluate_baseline(eq, params)
    assert got_label == label and value == pytest.approx(expected, abs=tol)


def test_metrics_on_equal_columns(tmp_path, capsys):
    path = tmp_path / "preds.csv"
    path.write_text("y,yhat\n1.0,1.0\n0.8,0.8\n1.3,1.3\n")
    assert main(["metrics", "--file", str(path), "--true-col", "y", "--pred-col", "yhat"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-2].startswith("mse,rmse,mae,mape")
    values = [float(v) for v in lines[-1].split(",")]
    assert values[:8] == [0.0] * 8 and values[8:] == [-16.0] * 8


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["fly"],
        ["generate", "--n", "10"],
        ["generate", "--n", "1", "--out", "x.csv"],
        ["run", "--models", "lr,xgb"],
        ["run", "--folds", "1", "--models", "lr"],
        ["run", "--bogus"],
        ["baseline", "--eq", "eq99", "--params", "a=1"],
        ["baseline", "--eq", "bagheri", "--params", "lambda=1,h1=0.1,L=1"],
        ["baseline", "--eq", "bagheri", "--params", "lambda=1,h1=0.1,L=1,W=-0.5"],
        ["baseline", "--eq", "bagheri", "--params", "lambda=one"],
        ["metrics", "--file", "/nonexistent.csv", "--true-col", "y", "--pred-col", "yhat"],
    ],
)
def test_usage_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("weirflow: error:")


def test_missing_column_and_bad_data(tmp_path, capsys):
    path = tmp_path / "p.csv"
    path.write_text("y,yhat\n1.0,abc\n")
    assert main(["metrics", "--file", str(path), "--true-col", "y", "--pred-col", "zz"]) == 2
    assert main(["metrics", "--file", str(path), "--true-col", "y", "--pred-col", "yhat"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd\n1,0,0.5,0.2,0.01,0.3,0.05,0.1,0.1,-0.5\n")
    assert main(["run", "--data", str(bad), "--models", "lr", "--out", str(tmp_path / "r")]) == 2
    assert "row 2" in capsys.readouterr().err


def test_seed_environment_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("WEIRFLOW_SEED", "5")
    assert main(["generate", "--n", "12", "--out", str(tmp_path / "env.csv")]) == 0
    assert main(["generate", "--n", "12", "--seed", "5", "--out", str(tmp_path / "flag.csv")]) == 0
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    monkeypatch.setenv("WEIRFLOW_SEED", "many")
    assert main(["generate", "--n", "12", "--out", str(tmp_path / "x.csv")]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "weirflow", "baseline", "--eq", "eq1", "--params", "cd=1,B=1,H1=1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "Q = 1.704894914"
