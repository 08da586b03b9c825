"""Command-line entry point: train, evaluate, predict, denoise-demo, report.

Output layout inside ``--out``::

    checkpoint-O{O}.json   parameters + config (train)
    manifest-O{O}.json     configs, seed, loss history, epoch timings (train)
    metrics-O{O}.json      MSE/MAE on the test split (train, evaluate)
    forecast-O{O}.csv      forecast after the final lookback window (predict)
    denoise-{kind}.csv/.svg/.json   filter demo dumps (denoise-demo)
    report.json            parameter counts and peak live bytes (report)
    timing.json            throughput, kept apart so report.json is reproducible

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

from .bench import (
    FILTER_KINDS, denoise_demo, dump_json, efficiency_report, evaluate, write_series_csv, write_series_svg,
)
from .data import load_csv, make_windows
from .efa import attention_param_count, efa_param_count
from .errors import ConfigError, DataError, NonFiniteError, ShapeError, SpectrumError
from .model import XLinearConfig, build_model, count_params, load_checkpoint
from .training import TrainConfig, fit, predict, save_run

COMMANDS = ("train", "evaluate", "predict", "denoise-demo", "report")
HORIZONS = (96, 192, 336, 720)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

_DATA_KEYS = {"path", "split", "horizons", "name"}
_DEMO_KEYS = {"filter", "steps", "noise_sigma", "length", "horizon", "lr", "batch_size"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xlinear", description="XLinear forecaster tooling")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat JSON config with model.*, train.*, data.* keys")
    p.add_argument("--data", help="CSV dataset (overrides data.path)")
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--seed", type=int, help="seed for init, shuffling and demo noise")
    p.add_argument("--horizon", type=int, help="forecast horizon O (default: config)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="config override, repeatable; VALUE is parsed as JSON when possible")
    return p


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def load_config(path=None, overrides=()) -> dict:
    """Merge a flat config file with ``key=value`` overrides (overrides win)."""
    cfg = {}
    if path is not None:
        try:
            cfg = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: expected a JSON object of flat keys")
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg[key.strip()] = _parse_value(raw)
    allowed = {
        "model": {f.name for f in fields(XLinearConfig)},
        "train": {f.name for f in fields(TrainConfig)},
        "data": _DATA_KEYS,
        "demo": _DEMO_KEYS,
    }
    for key in cfg:
        section, _, name = key.partition(".")
        if section not in allowed or name not in allowed[section]:
            raise ConfigError(f"unknown config key {key!r}")
    return cfg


def section(cfg: dict, prefix: str) -> dict:
    return {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith(prefix + ".")}


def _data_path(args, cfg) -> Path:
    path = args.data or cfg.get("data.path")
    if not path:
        raise DataError("no dataset given (use --data or data.path)")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset not found: {path}")
    return path


def _horizons(args, cfg, model_cfg: dict) -> list[int]:
    if args.horizon is not None:
        return [args.horizon]
    if "data.horizons" in cfg:
        return [int(h) for h in cfg["data.horizons"]]
    if "pred_len" in model_cfg:
        return [int(model_cfg["pred_len"])]
    return list(HORIZONS)


def _train_config(args, cfg) -> TrainConfig:
    d = section(cfg, "train")
    if args.seed is not None:
        d["seed"] = args.seed
    return TrainConfig.from_dict(d)


def _dataset(args, cfg, horizon: int):
    raw = load_csv(_data_path(args, cfg))
    seq_len = int(section(cfg, "model").get("seq_len", 96))
    return raw, make_windows(raw, seq_len, horizon, cfg.get("data.split", "standard"))


def _model_config(cfg, horizon: int, channels: int) -> XLinearConfig:
    d = section(cfg, "model")
    d["pred_len"] = horizon
    d["channels"] = channels
    return XLinearConfig.from_dict(d)


def _dataset_name(args, cfg) -> str:
    return cfg.get("data.name") or Path(args.data or cfg.get("data.path", "")).stem


def cmd_train(args, cfg, out: Path) -> None:
    tcfg = _train_config(args, cfg)
    for horizon in _horizons(args, cfg, section(cfg, "model")):
        _, ds = _dataset(args, cfg, horizon)
        model = build_model(_model_config(cfg, horizon, ds.num_channels), seed=tcfg.seed)
        model, hist = fit(model, ds, tcfg, log=lambda msg: print(f"O={horizon} {msg}", file=sys.stderr))
        save_run(out, model, tcfg, hist, tag=f"-O{horizon}")
        report = evaluate(model, ds, _dataset_name(args, cfg), "test")
        dump_json(report.to_dict(), out / f"metrics-O{horizon}.json")
        print(f"O={horizon} test mse {report.mse:.6f} mae {report.mae:.6f} (best epoch {hist.best_epoch + 1})")


def _checkpoint(out: Path, horizon: int):
    path = out / f"checkpoint-O{horizon}.json"
    if not path.is_file():
        raise DataError(f"checkpoint not found: {path} (run train first)")
    model, _ = load_checkpoint(path)
    return model


def cmd_evaluate(args, cfg, out: Path) -> None:
    for horizon in _horizons(args, cfg, section(cfg, "model")):
        model = _checkpoint(out, horizon)
        _, ds = _dataset(args, cfg, horizon)
        report = evaluate(model, ds, _dataset_name(args, cfg), "test")
        dump_json(report.to_dict(), out / f"metrics-O{horizon}.json")
        print(f"O={horizon} test mse {report.mse:.6f} mae {report.mae:.6f} samples {report.samples}")


def cmd_predict(args, cfg, out: Path) -> None:
    for horizon in _horizons(args, cfg, section(cfg, "model")):
        model = _checkpoint(out, horizon)
        raw, ds = _dataset(args, cfg, horizon)
        L = model.config.seq_len
        if len(ds.values) < L:
            raise DataError(f"need at least {L} rows to forecast, have {len(ds.values)}")
        window = ds.values[-L:][None]
        forecast = ds.scaler.inverse(predict(model, window)[0])
        path = out / f"forecast-O{horizon}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step"] + list(raw.channels))
            for i, row in enumerate(forecast, start=1):
                w.writerow([i] + [repr(float(v)) for v in row])
        print(f"O={horizon} forecast written to {path}")


def cmd_denoise(args, cfg, out: Path) -> None:
    d = section(cfg, "demo")
    tcfg = _train_config(args, cfg)
    tcfg = TrainConfig.from_dict({
        **{f.name: getattr(tcfg, f.name) for f in fields(TrainConfig)},
        "lr": d.get("lr", cfg.get("train.lr", 0.001)),
        "batch_size": d.get("batch_size", cfg.get("train.batch_size", 8)),
    })
    kinds = [d["filter"]] if "filter" in d else list(FILTER_KINDS)
    for kind in kinds:
        report = denoise_demo(
            kind,
            length=int(d.get("length", 1000)),
            horizon=int(d.get("horizon", args.horizon or 1000)),
            cfg=tcfg,
            steps=int(d.get("steps", 500)),
            noise_sigma=float(d.get("noise_sigma", 0.3)),
        )
        write_series_csv(report, out / f"denoise-{kind}.csv")
        write_series_svg(report, out / f"denoise-{kind}.svg")
        dump_json(report.summary(), out / f"denoise-{kind}.json")
        print(f"{kind}: mse noisy {report.mse_noisy:.6f} filtered {report.mse_filtered:.6f}")


def cmd_report(args, cfg, out: Path) -> None:
    tcfg = _train_config(args, cfg)
    model_cfg = section(cfg, "model")
    horizon = args.horizon or int(model_cfg.get("pred_len", 96))
    ds = None
    # a config's default data path is optional here; an explicit --data is not
    if args.data or Path(cfg.get("data.path") or "-missing-").is_file():
        _, ds = _dataset(args, cfg, horizon)
        channels = ds.num_channels
    else:
        channels = int(model_cfg.get("channels", 7))
    model = build_model(_model_config(cfg, horizon, channels), seed=tcfg.seed)
    c = model.config
    report = efficiency_report(model, ds, tcfg)
    timing = {k: report.pop(k) for k in ("samples_per_second",)}
    dump_json(report, out / "report.json")
    dump_json(timing, out / "timing.json")
    full = attention_param_count(8, 512, 64)
    efa = efa_param_count(c.channels, c.d_model, c.efa_projection) if c.use_efa else 0
    print(f"full attention params (h=8, d_model=512, d_k=64): {full}")
    print(f"EFA params (C={c.channels}, d={c.d_model}): {efa}")
    print(f"model params: {count_params(model)}")
    print(f"peak live bytes: {report['peak_live_bytes']}")
    print(f"samples/s: {timing['samples_per_second']:.1f}")


_HANDLERS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "denoise-demo": cmd_denoise,
    "report": cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = load_config(args.config, args.set)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _HANDLERS[args.command](args, cfg, out)
    except ConfigError as e:
        print(f"xlinear: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ShapeError, OSError) as e:
        print(f"xlinear: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (NonFiniteError, SpectrumError, FloatingPointError) as e:
        print(f"xlinear: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
