"""XLinear assembly: RevIN -> decomposition -> EFA(trend) | CrossFilter(seasonal)
-> time-axis concat -> shared linear head -> RevIN inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .crossfilter import PaiKernel, TexNet, cross_fuse, cross_integrate, init_pai, init_texnet
from .decomposition import DEFAULT_KERNEL, DecompPair, decompose
from .efa import EfaParams, efa_forward, init_efa
from .errors import ConfigError, NonFiniteError, ShapeError
from .spectral import CONVENTION
from .tensor import Tensor, add, as_tensor, concat, div, matmul, mean, mul, sqrt, square, sub, transpose

CHECKPOINT_FORMAT = "xlinear-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class XLinearConfig:
    seq_len: int = 96
    pred_len: int = 96
    channels: int = 7
    kernel: int = DEFAULT_KERNEL
    d_model: int = 16
    eps: float = 1e-8
    clamp_max: float = 1e4
    efa_projection: bool = True
    tex_layers: int = 2
    tex_hidden: int | None = None
    revin: bool = True
    revin_affine: bool = True
    revin_eps: float = 1e-5
    use_efa: bool = True
    use_crossfilter: bool = True
    identity_filters: bool = False

    def __post_init__(self):
        if self.seq_len < 2 or self.pred_len < 1 or self.channels < 1 or self.d_model < 1:
            raise ConfigError(f"invalid model sizes in {self}")
        if self.kernel % 2 == 0 or not 1 <= self.kernel <= 2 * self.seq_len - 1:
            raise ConfigError(f"kernel must be odd and in [1, {2 * self.seq_len - 1}], got {self.kernel}")
        if not self.efa_projection and self.d_model != self.channels:
            raise ConfigError("efa_projection=False needs d_model == channels")
        if self.tex_layers < 1:
            raise ConfigError("tex_layers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "XLinearConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def head_width(self) -> int:
        return 2 * self.seq_len


@dataclass
class RevinState:
    mu: Tensor
    sigma: Tensor


class XLinearModel:
    """Parameter container plus forward pass. Build with :func:`build_model`."""

    def __init__(self, config: XLinearConfig, efa: EfaParams | None, pai: PaiKernel | None,
                 tex: TexNet | None, head_w: Tensor, head_b: Tensor,
                 gamma: Tensor | None, beta: Tensor | None):
        self.config = config
        self.efa = efa
        self.pai = pai
        self.tex = tex
        self.head_w = head_w
        self.head_b = head_b
        self.gamma = gamma
        self.beta = beta

    def named_parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        if self.efa is not None:
            params.update({f"efa.{k}": v for k, v in self.efa.tensors().items()})
        if self.pai is not None:
            params.update({f"pai.{k}": v for k, v in self.pai.tensors().items()})
        if self.tex is not None:
            params.update({f"tex.{k}": v for k, v in self.tex.tensors().items()})
        params["head.weight"] = self.head_w
        params["head.bias"] = self.head_b
        if self.gamma is not None:
            params["revin.gamma"] = self.gamma
            params["revin.beta"] = self.beta
        return params

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        if set(state) != set(params):
            missing, extra = set(params) - set(state), set(state) - set(params)
            raise ConfigError(f"state mismatch: missing={sorted(missing)} unexpected={sorted(extra)}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.shape:
                raise ShapeError(f"parameter {k}: expected shape {p.shape}, got {arr.shape}")
            p.data = arr.copy()

    def __call__(self, x) -> Tensor:
        return xlinear_forward(x, self)


def build_model(config: XLinearConfig, seed: int = 0) -> XLinearModel:
    rng = np.random.default_rng(seed)
    c = config
    efa = init_efa(c.channels, c.d_model, rng, c.efa_projection, c.eps, c.clamp_max) if c.use_efa else None
    with_filters = c.use_crossfilter and not c.identity_filters
    pai = init_pai(c.seq_len, rng) if with_filters else None
    tex = init_texnet(c.seq_len, rng, c.tex_layers, c.tex_hidden) if with_filters else None
    bound = 1.0 / math.sqrt(c.head_width)
    head_w = Tensor(rng.uniform(-bound, bound, (c.head_width, c.pred_len)), requires_grad=True)
    head_b = Tensor(rng.uniform(-bound, bound, c.pred_len), requires_grad=True)
    if c.revin and c.revin_affine:
        gamma = Tensor(np.ones(c.channels), requires_grad=True)
        beta = Tensor(np.zeros(c.channels), requires_grad=True)
    else:
        gamma = beta = None
    return XLinearModel(c, efa, pai, tex, head_w, head_b, gamma, beta)


def revin_normalize(x, m: XLinearModel) -> tuple[Tensor, RevinState]:
    """Per-instance, per-channel standardization over time, then the affine map."""
    x = as_tensor(x)
    if x.ndim != 3 or x.shape[1] < 2:
        raise ShapeError(f"revin_normalize: expected [B, L>=2, C], got {x.shape}")
    mu = mean(x, axis=1, keepdims=True)
    centered = sub(x, mu)
    sigma = sqrt(add(mean(square(centered), axis=1, keepdims=True), m.config.revin_eps))
    z = div(centered, sigma)
    if m.gamma is not None:
        z = add(mul(z, m.gamma), m.beta)
    return z, RevinState(mu, sigma)


def revin_denormalize(y, state: RevinState, m: XLinearModel) -> Tensor:
    y = as_tensor(y)
    if y.ndim != 3 or y.shape[0] != state.mu.shape[0] or y.shape[2] != state.mu.shape[2]:
        raise ShapeError(f"revin_denormalize: output {y.shape} does not match state {state.mu.shape}")
    if m.gamma is not None:
        y = div(sub(y, m.beta), m.gamma)
    return add(mul(y, state.sigma), state.mu)


def _checked(block: str, fn, *args) -> Tensor:
    """Run one block; any non-finite value inside or after it is reported by name."""
    try:
        out = fn(*args)
    except NonFiniteError as e:
        raise NonFiniteError(f"xlinear_forward: non-finite value in {block}: {e}") from e
    parts = (out.trend, out.seasonal) if isinstance(out, DecompPair) else (out,)
    if not all(np.isfinite(t.data).all() for t in parts):
        raise NonFiniteError(f"xlinear_forward: non-finite activation after {block}")
    return out


def branch_outputs(z: Tensor, m: XLinearModel) -> tuple[Tensor, Tensor]:
    """(trend-branch, seasonal-branch) outputs for a normalized [B, L, C] input."""
    c = m.config
    pair = _checked("decomposition", decompose, z, c.kernel)
    u = _checked("efa", efa_forward, pair.trend, m.efa) if c.use_efa else pair.trend
    if not c.use_crossfilter:
        v = pair.seasonal
    elif c.identity_filters:
        v = _checked("crossfilter", cross_fuse, pair.seasonal, pair.seasonal)
    else:
        v = _checked("crossfilter", cross_integrate, pair.seasonal, m.pai, m.tex)
    return u, v


def apply_head(h: Tensor, m: XLinearModel) -> Tensor:
    """[B, 2L, C] -> [B, O, C]; the same map is applied to every channel."""
    per_channel = transpose(h, (0, 2, 1))
    y = add(matmul(per_channel, m.head_w), m.head_b)
    return transpose(y, (0, 2, 1))


def _checked_revin(x: Tensor, m: XLinearModel) -> tuple[Tensor, RevinState]:
    try:
        z, state = revin_normalize(x, m)
    except NonFiniteError as e:
        raise NonFiniteError(f"xlinear_forward: non-finite value in revin: {e}") from e
    if not np.isfinite(z.data).all():
        raise NonFiniteError("xlinear_forward: non-finite activation after revin")
    return z, state


def xlinear_forward(x, m: XLinearModel) -> Tensor:
    x = as_tensor(x)
    c = m.config
    if x.ndim != 3 or x.shape[1] != c.seq_len or x.shape[2] != c.channels:
        raise ConfigError(f"xlinear_forward: input {x.shape} does not match [B, {c.seq_len}, {c.channels}]")
    if c.revin:
        z, state = _checked_revin(x, m)
    else:
        z, state = x, None
    u, v = branch_outputs(z, m)
    h = concat([u, v], axis=1)
    y = _checked("head", apply_head, h, m)
    return revin_denormalize(y, state, m) if state is not None else y


def count_params(m: XLinearModel) -> int:
    return int(sum(p.size for p in m.parameters()))


# -- checkpoints -----------------------------------------------------------

def checkpoint_dict(m: XLinearModel, extra: dict | None = None) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "spectral_convention": CONVENTION,
        "config": asdict(m.config),
        "params": {
            k: {"shape": list(v.shape), "values": v.data.reshape(-1).tolist()}
            for k, v in sorted(m.named_parameters().items())
        },
        "extra": extra or {},
    }


def save_checkpoint(m: XLinearModel, path, extra: dict | None = None) -> None:
    Path(path).write_text(json.dumps(checkpoint_dict(m, extra), sort_keys=True, indent=1))


def load_checkpoint(path) -> tuple[XLinearModel, dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not an xlinear checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    if doc.get("spectral_convention") != CONVENTION:
        raise ConfigError(f"{path}: spectral convention {doc.get('spectral_convention')!r} != {CONVENTION!r}")
    model = build_model(XLinearConfig.from_dict(doc["config"]))
    state = {k: np.asarray(v["values"], dtype=np.float64).reshape(v["shape"]) for k, v in doc["params"].items()}
    model.load_state_dict(state)
    return model, doc.get("extra", {})


__all__ = [
    "XLinearConfig", "XLinearModel", "RevinState", "build_model", "revin_normalize",
    "revin_denormalize", "xlinear_forward", "branch_outputs", "apply_head", "count_params",
    "save_checkpoint", "load_checkpoint", "checkpoint_dict",
]
