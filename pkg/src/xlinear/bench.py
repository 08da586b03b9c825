"""Metrics, synthetic signals, the filter denoising demo and efficiency reporting."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .crossfilter import PaiKernel, TexNet, cross_integrate, init_pai, init_texnet, pai_filter, tex_filter
from .data import WindowedDataset
from .efa import attention_param_count, efa_param_count
from .errors import ConfigError, ShapeError
from .model import XLinearModel, count_params
from .tensor import Tensor, add, backward, matmul, no_grad, transpose
from .training import AdamState, TrainConfig, adam_step, evaluate_split, mse_loss

FILTER_KINDS = ("pai", "tex", "cross")


def _pair(pred, target) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"shapes differ: {pred.shape} vs {target.shape}")
    return pred, target


def mse(pred, target) -> float:
    pred, target = _pair(pred, target)
    return float(np.mean((pred - target) ** 2))


def mae(pred, target) -> float:
    pred, target = _pair(pred, target)
    return float(np.mean(np.abs(pred - target)))


@dataclass
class MetricsReport:
    dataset: str
    horizon: int
    mse: float
    mae: float
    per_channel_mse: list[float]
    per_channel_mae: list[float]
    samples: int
    params: int
    wall_clock: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_clock")
        return d


def metrics_report(pred, target, dataset: str, params: int, wall_clock: float = 0.0) -> MetricsReport:
    pred, target = _pair(pred, target)
    err = pred - target
    return MetricsReport(
        dataset=dataset,
        horizon=pred.shape[1],
        mse=float(np.mean(err ** 2)),
        mae=float(np.mean(np.abs(err))),
        per_channel_mse=np.mean(err ** 2, axis=(0, 1)).tolist(),
        per_channel_mae=np.mean(np.abs(err), axis=(0, 1)).tolist(),
        samples=int(pred.shape[0]),
        params=int(params),
        wall_clock=float(wall_clock),
    )


def evaluate(model: XLinearModel, ds: WindowedDataset, dataset: str = "", split: str = "test",
             batch_size: int = 256) -> MetricsReport:
    """Standardized-scale MSE/MAE over every window of ``split``."""
    started = time.perf_counter()
    pred, y = evaluate_split(model, ds, split, batch_size)
    return metrics_report(pred, y, dataset, count_params(model), time.perf_counter() - started)


def naive_repeat_last(ds: WindowedDataset, split: str = "test") -> float:
    """MSE of forecasting every horizon step with the last observed value."""
    x, y = ds.windows(split)
    return mse(np.repeat(x[:, -1:, :], ds.pred_len, axis=1), y)


# -- synthetic signals -----------------------------------------------------

def synth_noisy_sine(periods: int = 20, steps: int = 10000, noise_sigma: float = 0.3,
                     seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    if steps < 2 * periods:
        raise ConfigError(f"need steps >= 2 * periods, got steps={steps}, periods={periods}")
    t = np.arange(steps)
    clean = np.sin(2.0 * np.pi * periods * t / steps)
    noise = np.random.default_rng(seed).normal(0.0, noise_sigma, steps) if noise_sigma > 0 else 0.0
    return clean, clean + noise


def synth_multichannel(steps: int = 3000, noise_sigma: float = 0.1, seed: int = 0) -> np.ndarray:
    """Three channels of mixed sines plus linear trends plus Gaussian noise, [steps, 3]."""
    t = np.arange(steps)
    cols = [
        np.sin(2 * np.pi * t / 24) + 0.5 * np.sin(2 * np.pi * t / 168) + 0.002 * t,
        0.8 * np.sin(2 * np.pi * t / 12 + 1.0) + 0.3 * np.sin(2 * np.pi * t / 48) - 0.001 * t,
        1.2 * np.sin(2 * np.pi * t / 36) + 0.0015 * t,
    ]
    rng = np.random.default_rng(seed)
    return np.stack(cols, axis=1) + rng.normal(0.0, noise_sigma, (steps, 3))


# -- denoising demo --------------------------------------------------------

@dataclass
class FilterReadout:
    """Frequency filter on [B, L, 1] windows followed by a linear L -> O readout."""

    kind: str
    length: int
    horizon: int
    pai: PaiKernel | None
    tex: TexNet | None
    weight: Tensor
    bias: Tensor

    def filtered(self, x) -> Tensor:
        if self.kind == "pai":
            return pai_filter(x, self.pai)
        if self.kind == "tex":
            return tex_filter(x, self.tex)
        return cross_integrate(x, self.pai, self.tex)

    def readout(self, f: Tensor) -> Tensor:
        y = add(matmul(transpose(f, (0, 2, 1)), self.weight), self.bias)
        return transpose(y, (0, 2, 1))

    def named_parameters(self) -> dict[str, Tensor]:
        params = {}
        if self.pai is not None:
            params.update({f"pai.{k}": v for k, v in self.pai.tensors().items()})
        if self.tex is not None:
            params.update({f"tex.{k}": v for k, v in self.tex.tensors().items()})
        params["readout.weight"] = self.weight
        params["readout.bias"] = self.bias
        return params


def build_filter_readout(kind: str, length: int, horizon: int, seed: int = 0) -> FilterReadout:
    if kind not in FILTER_KINDS:
        raise ConfigError(f"filter kind must be one of {FILTER_KINDS}, got {kind!r}")
    rng = np.random.default_rng(seed)
    pai = init_pai(length, rng) if kind in ("pai", "cross") else None
    tex = init_texnet(length, rng) if kind in ("tex", "cross") else None
    bound = 1.0 / math.sqrt(length)
    weight = Tensor(rng.uniform(-bound, bound, (length, horizon)), requires_grad=True)
    bias = Tensor(np.zeros(horizon), requires_grad=True)
    return FilterReadout(kind, length, horizon, pai, tex, weight, bias)


@dataclass
class DemoReport:
    filter_kind: str
    seed: int
    noise_sigma: float
    steps: int
    mse_noisy: float
    mse_filtered: float
    mse_forecast: float
    final_loss: float
    excerpt_start: int
    excerpt: dict = field(default_factory=dict, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("excerpt")
        return d


def _window_starts(total: int, length: int, horizon: int) -> np.ndarray:
    return np.arange(0, total - length - horizon + 1)


def denoise_demo(filter_kind: str = "cross", length: int = 1000, horizon: int = 1000,
                 cfg: TrainConfig | None = None, steps: int = 500, noise_sigma: float = 0.3,
                 periods: int = 20, signal_steps: int = 10000, excerpt: tuple[int, int] = (4000, 4100),
                 recon_weight: float = 1.0) -> DemoReport:
    """Train filter + linear readout on a noisy sine, then measure the filter stage.

    Training uses one noise draw (seed ``cfg.seed``); evaluation uses an
    independent draw of the same sine (seed ``cfg.seed + 1``). The loss is
    the forecast MSE against the clean future plus ``recon_weight`` times the
    MSE between the filter-stage output and the clean lookback window.
    """
    cfg = cfg or TrainConfig(lr=0.001, batch_size=8)
    clean, noisy = synth_noisy_sine(periods, signal_steps, noise_sigma, seed=cfg.seed)
    _, noisy_test = synth_noisy_sine(periods, signal_steps, noise_sigma, seed=cfg.seed + 1)
    model = build_filter_readout(filter_kind, length, horizon, seed=cfg.seed)
    params = model.named_parameters()
    state = AdamState()
    starts = _window_starts(signal_steps, length, horizon)
    rng = np.random.default_rng(cfg.seed)
    offs_in = np.arange(length)
    offs_out = length + np.arange(horizon)

    loss_value = float("nan")
    for _ in range(steps):
        pick = rng.choice(starts, size=cfg.batch_size, replace=False)
        x = noisy[pick[:, None] + offs_in][..., None]
        target_in = clean[pick[:, None] + offs_in][..., None]
        target_out = clean[pick[:, None] + offs_out][..., None]
        f = model.filtered(x)
        loss = mse_loss(model.readout(f), target_out)
        if recon_weight:
            loss = add(loss, mse_loss(f, target_in) * recon_weight)
        backward(loss)
        adam_step(params, state, cfg)
        loss_value = loss.item()

    # evaluation: windows tiling the test draw, plus the window centred on the excerpt
    lo, hi = excerpt
    centre = min(max((lo + hi) // 2 - length // 2, 0), signal_steps - length - horizon)
    eval_starts = np.unique(np.concatenate([starts[:: length // 2], [centre]]))
    with no_grad():
        x = noisy_test[eval_starts[:, None] + offs_in][..., None]
        f = model.filtered(x).data[..., 0]
        yhat = model.readout(Tensor(f[..., None])).data[..., 0]
    ref_in = clean[eval_starts[:, None] + offs_in]
    ref_out = clean[eval_starts[:, None] + offs_out]
    row = int(np.flatnonzero(eval_starts == centre)[0])
    span = slice(lo - centre, hi - centre)
    return DemoReport(
        filter_kind=filter_kind,
        seed=cfg.seed,
        noise_sigma=noise_sigma,
        steps=steps,
        mse_noisy=mse(x[..., 0], ref_in),
        mse_filtered=mse(f, ref_in),
        mse_forecast=mse(yhat, ref_out),
        final_loss=loss_value,
        excerpt_start=lo,
        excerpt={
            "step": list(range(lo, hi)),
            "noisy": x[row, span, 0].tolist(),
            "filtered": f[row, span].tolist(),
            "clean": ref_in[row, span].tolist(),
        },
    )


def write_series_csv(report: DemoReport, path) -> None:
    ex = report.excerpt
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "noisy", "filtered", "clean"])
        for row in zip(ex["step"], ex["noisy"], ex["filtered"], ex["clean"]):
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def write_series_svg(report: DemoReport, path, width: int = 800, height: int = 300) -> None:
    """Static line chart of the excerpt: noisy (grey), filtered (red), clean (blue)."""
    ex = report.excerpt
    series = [("noisy", "#999999"), ("filtered", "#d62728"), ("clean", "#1f77b4")]
    allv = np.concatenate([np.asarray(ex[k]) for k, _ in series])
    vmin, vmax = float(allv.min()), float(allv.max())
    span = (vmax - vmin) or 1.0
    n = len(ex["step"])
    pad = 20

    def pt(i, v):
        x = pad + (width - 2 * pad) * i / max(n - 1, 1)
        y = height - pad - (height - 2 * pad) * (v - vmin) / span
        return f"{x:.2f},{y:.2f}"

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for key, colour in series:
        pts = " ".join(pt(i, v) for i, v in enumerate(ex[key]))
        lines.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
    for j, (key, colour) in enumerate(series):
        lines.append(f'<text x="{pad + 90 * j}" y="14" font-size="12" fill="{colour}">{key}</text>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


# -- efficiency ------------------------------------------------------------

def live_bytes(model: XLinearModel, batch: int) -> int:
    """Parameter bytes plus the bytes of every tensor alive in one forward graph."""
    from .tensor import _topological, mean as _mean

    c = model.config
    x = Tensor(np.zeros((batch, c.seq_len, c.channels)))
    model.zero_grad()
    out = _mean(model(x))
    return int(sum(t.data.nbytes for t in _topological(out)))


def efficiency_report(model: XLinearModel, ds: WindowedDataset | None = None, cfg: TrainConfig | None = None,
                      split: str = "test", max_samples: int = 512) -> dict:
    """Parameter count, peak live-buffer estimate and evaluation throughput."""
    cfg = cfg or TrainConfig()
    c = model.config
    if ds is not None and ds.num_samples(split) > 0:
        n = min(ds.num_samples(split), max_samples)
        x, _ = ds.windows(split, np.arange(n))
    else:
        n = min(cfg.eval_batch_size, max_samples)
        x = np.random.default_rng(cfg.seed).normal(size=(n, c.seq_len, c.channels))
    started = time.perf_counter()
    with no_grad():
        for lo in range(0, n, cfg.eval_batch_size):
            model(x[lo : lo + cfg.eval_batch_size])
    elapsed = max(time.perf_counter() - started, 1e-12)
    efa = efa_param_count(c.channels, c.d_model, c.efa_projection) if c.use_efa else 0
    return {
        "params": count_params(model),
        "efa_params": efa,
        "full_attention_params_h8_d512_dk64": attention_param_count(8, 512, 64),
        "peak_live_bytes": live_bytes(model, min(cfg.batch_size, n)),
        "samples": int(n),
        "samples_per_second": n / elapsed,
    }


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True))
