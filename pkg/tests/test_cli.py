import csv
import json

import numpy as np
import pytest

from xlinear.bench import evaluate, synth_multichannel
from xlinear.cli import load_config, run
from xlinear.data import load_csv, make_windows
from xlinear.errors import ConfigError
from xlinear.model import load_checkpoint

TINY = ["--set", "model.seq_len=16", "--set", "model.kernel=5", "--set", "model.d_model=4",
        "--set", "train.max_epochs=2", "--set", "train.batch_size=16", "--horizon", "8"]


@pytest.fixture
def toy_csv(tmp_path):
    values = synth_multichannel(300, seed=0)
    path = tmp_path / "toy.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "a", "b", "c"])
        for i, row in enumerate(values):
            w.writerow([f"2020-01-01 {i:05d}"] + [repr(float(v)) for v in row])
    return path


def _train(toy_csv, out, *extra):
    return run(["train", "--data", str(toy_csv), "--out", str(out), "--seed", "3", *TINY, *extra])


def test_unknown_flag_is_usage_error(capsys):
    assert run(["train", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_command_and_bad_set(capsys, tmp_path):
    assert run(["fly"]) == 2
    assert run(["report", "--out", str(tmp_path), "--set", "novalue"]) == 2
    assert run(["report", "--out", str(tmp_path), "--set", "model.bogus=1"]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_data_is_data_error(tmp_path, capsys):
    assert run(["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 3
    assert "not found" in capsys.readouterr().err


def test_evaluate_without_checkpoint(tmp_path, toy_csv):
    assert run(["evaluate", "--data", str(toy_csv), "--out", str(tmp_path / "empty"), *TINY]) == 3


def test_train_evaluate_matches_library(tmp_path, toy_csv):
    out = tmp_path / "run"
    assert _train(toy_csv, out) == 0
    for name in ("checkpoint-O8.json", "manifest-O8.json", "metrics-O8.json"):
        assert (out / name).is_file()
    (out / "metrics-O8.json").unlink()
    assert run(["evaluate", "--data", str(toy_csv), "--out", str(out), *TINY]) == 0
    cli = json.loads((out / "metrics-O8.json").read_text())

    model, _ = load_checkpoint(out / "checkpoint-O8.json")
    ds = make_windows(load_csv(toy_csv), 16, 8, "standard")
    lib = evaluate(model, ds, "toy")
    assert cli["mse"] == lib.mse and cli["mae"] == lib.mae
    assert cli["samples"] == ds.num_samples("test")


def test_train_twice_byte_identical(tmp_path, toy_csv):
    assert _train(toy_csv, tmp_path / "a") == 0
    assert _train(toy_csv, tmp_path / "b") == 0
    for name in ("checkpoint-O8.json", "metrics-O8.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_predict_writes_forecast(tmp_path, toy_csv):
    out = tmp_path / "run"
    assert _train(toy_csv, out) == 0
    assert run(["predict", "--data", str(toy_csv), "--out", str(out), *TINY]) == 0
    rows = list(csv.reader((out / "forecast-O8.csv").open()))
    assert rows[0] == ["step", "a", "b", "c"] and len(rows) == 9
    # forecasts are in the original scale, so roughly in the data's range
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert np.isfinite(vals).all() and np.abs(vals).max() < 10


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model.d_model": 8, "train.lr": 0.01}))
    cfg = load_config(path, ["train.lr=0.001"])
    assert cfg == {"model.d_model": 8, "train.lr": 0.001}
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_shipped_configs_parse():
    from pathlib import Path
    configs = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert len(configs) >= 9
    for path in configs:
        load_config(path)


def test_report_surfaces_attention_count(tmp_path, capsys):
    assert run(["report", "--out", str(tmp_path / "a"), "--seed", "0"]) == 0
    text = capsys.readouterr().out
    assert "786432" in text and "EFA params (C=7, d=16): 448" in text
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["efa_params"] < rep["full_attention_params_h8_d512_dk64"] == 786432
    assert "samples_per_second" not in rep
    assert run(["report", "--out", str(tmp_path / "b"), "--seed", "0"]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_denoise_demo_command(tmp_path):
    args = ["denoise-demo", "--out", str(tmp_path), "--set", "demo.filter=pai", "--set", "demo.steps=3",
            "--set", "demo.length=200", "--set", "demo.horizon=100"]
    assert run(args) == 0
    assert {p.name for p in tmp_path.iterdir()} == {"denoise-pai.csv", "denoise-pai.svg", "denoise-pai.json"}
    assert run(args[:-2] + ["--set", "demo.filter=lstm"]) == 2
