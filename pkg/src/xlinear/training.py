"""Adam + MSE training with validation-based early stopping."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .data import WindowedDataset
from .errors import ConfigError, DataError, NonFiniteError, ShapeError
from .model import XLinearModel, save_checkpoint
from .tensor import Tensor, as_tensor, backward, mean, no_grad, square, sub

LR_GRID = (0.01, 0.05, 0.001, 0.005, 0.0001, 0.0005)
BATCH_GRID = (32, 64, 128, 256)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.005
    batch_size: int = 32
    max_epochs: int = 30
    patience: int = 5
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    eval_batch_size: int = 256

    def __post_init__(self):
        if not self.lr > 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.batch_size < 1 or self.eval_batch_size < 1:
            raise ConfigError("batch sizes must be >= 1")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


def mse_loss(pred, target) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss: shapes differ: {pred.shape} vs {target.shape}")
    return mean(square(sub(pred, target)))


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(params: dict[str, Tensor], state: AdamState, cfg: TrainConfig) -> None:
    """One bias-corrected Adam update; clears gradients afterwards.

    A missing gradient counts as zero. Raises before touching any parameter
    if a gradient is non-finite.
    """
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p.data) if p.grad is None else p.grad
        if not np.isfinite(g).all():
            raise NonFiniteError(f"adam_step: non-finite gradient for parameter {name!r}")
        grads[name] = g
    state.step += 1
    t = state.step
    b1, b2 = cfg.beta1, cfg.beta2
    for name, p in params.items():
        g = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p.data = p.data - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
        p.grad = None


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def best_val(self) -> float:
        return min(self.val_loss) if self.val_loss else float("inf")

    def losses(self) -> dict:
        """Deterministic part of the history (no timings)."""
        return {
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }


def predict(model: XLinearModel, inputs: np.ndarray, batch_size: int = 256) -> np.ndarray:
    outs = []
    with no_grad():
        for lo in range(0, len(inputs), batch_size):
            outs.append(model(inputs[lo : lo + batch_size]).data)
    return np.concatenate(outs, axis=0)


def evaluate_split(model: XLinearModel, ds: WindowedDataset, split: str,
                   batch_size: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """(predictions, targets) over every window of ``split``, standardized scale."""
    if ds.num_samples(split) == 0:
        raise DataError(f"split {split!r} has no windows")
    x, y = ds.windows(split)
    return predict(model, x, batch_size), y


def split_mse(model: XLinearModel, ds: WindowedDataset, split: str, batch_size: int = 256) -> float:
    pred, y = evaluate_split(model, ds, split, batch_size)
    return float(np.mean((pred - y) ** 2))


def _check_compatible(model: XLinearModel, ds: WindowedDataset) -> None:
    c = model.config
    if (c.seq_len, c.pred_len, c.channels) != (ds.seq_len, ds.pred_len, ds.num_channels):
        raise ConfigError(
            f"model expects L={c.seq_len}, O={c.pred_len}, C={c.channels}; dataset has "
            f"L={ds.seq_len}, O={ds.pred_len}, C={ds.num_channels}"
        )


def fit(model: XLinearModel, ds: WindowedDataset, cfg: TrainConfig,
        log=None) -> tuple[XLinearModel, History]:
    """Train in place; on return the model holds its best-validation parameters."""
    _check_compatible(model, ds)
    for split in ("train", "val"):
        if ds.num_samples(split) == 0:
            raise DataError(f"split {split!r} has no windows")
    rng = np.random.default_rng(cfg.seed)
    params = model.named_parameters()
    state = AdamState()
    hist = History()
    best_state = model.state_dict()
    best_val = float("inf")
    waited = 0
    n_train = ds.num_samples("train")

    for epoch in range(cfg.max_epochs):
        started = time.perf_counter()
        order = rng.permutation(n_train)
        total, count = 0.0, 0
        for x, y in ds.batches("train", cfg.batch_size, order):
            loss = mse_loss(model(x), y)
            backward(loss)
            adam_step(params, state, cfg)
            for name, p in params.items():
                if not np.isfinite(p.data).all():
                    raise NonFiniteError(f"fit: parameter {name!r} became non-finite at step {state.step}")
            total += loss.item() * len(x)
            count += len(x)
        val = split_mse(model, ds, "val", cfg.eval_batch_size)
        hist.train_loss.append(total / count)
        hist.val_loss.append(val)
        hist.epoch_seconds.append(time.perf_counter() - started)
        if log is not None:
            log(f"epoch {epoch + 1}: train {total / count:.6f} val {val:.6f}")
        if val < best_val:
            best_val, best_state, waited = val, model.state_dict(), 0
            hist.best_epoch = epoch
        else:
            waited += 1
            if waited >= cfg.patience:
                hist.stopped_early = True
                break
    model.load_state_dict(best_state)
    return model, hist


def write_manifest(path, model: XLinearModel, cfg: TrainConfig, hist: History, extra: dict | None = None) -> None:
    doc = {
        "model_config": asdict(model.config),
        "train_config": asdict(cfg),
        "seed": cfg.seed,
        "history": hist.losses(),
        "epoch_seconds": hist.epoch_seconds,
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


def save_run(out_dir, model: XLinearModel, cfg: TrainConfig, hist: History, tag: str = "") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / f"checkpoint{tag}.json"
    manifest = out / f"manifest{tag}.json"
    save_checkpoint(model, ckpt, extra={"train_config": asdict(cfg), "history": hist.losses()})
    write_manifest(manifest, model, cfg, hist)
    return {"checkpoint": ckpt, "manifest": manifest}
