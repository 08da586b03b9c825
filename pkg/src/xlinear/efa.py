"""Enhanced Frequency Attention over the trend component.

Queries and keys interact as a normalized complex product of their spectra,
which squares (and so sharpens) whatever frequencies dominate both. The
time-domain result is softmax-normalized over time and weights an
exponentially activated value stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ShapeError
from .spectral import ComplexSpectrum, complex_mul, irfft, rfft
from .tensor import (
    Tensor,
    add,
    as_tensor,
    clamp_max,
    div,
    exp,
    matmul,
    mul,
    scale,
    softmax,
    sqrt,
    sum_,
    transpose,
)


@dataclass
class EfaParams:
    Wq: Tensor
    Wk: Tensor
    Wv: Tensor
    Wo: Tensor | None
    eps: float = 1e-8
    clamp_max: float = 1e4

    @property
    def d(self) -> int:
        return self.Wq.shape[1]

    @property
    def channels(self) -> int:
        return self.Wq.shape[0]

    def tensors(self) -> dict[str, Tensor]:
        out = {"Wq": self.Wq, "Wk": self.Wk, "Wv": self.Wv}
        if self.Wo is not None:
            out["Wo"] = self.Wo
        return out


def init_efa(channels: int, d: int, rng: np.random.Generator, project_out: bool = True,
             eps: float = 1e-8, clamp: float = 1e4) -> EfaParams:
    """Glorot-uniform projections; ``project_out=False`` requires d == channels."""
    if d < 1 or channels < 1:
        raise ShapeError(f"init_efa: need positive sizes, got C={channels}, d={d}")

    def glorot(fan_in, fan_out):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), requires_grad=True)

    wq, wk, wv = glorot(channels, d), glorot(channels, d), glorot(channels, d)
    if project_out:
        wo = glorot(d, channels)
    else:
        if d != channels:
            raise ShapeError(f"init_efa: projection-free EFA needs d == C, got d={d}, C={channels}")
        wo = None
    return EfaParams(wq, wk, wv, wo, eps=eps, clamp_max=clamp)


def project_qkv(x_trend, p: EfaParams) -> tuple[Tensor, Tensor, Tensor]:
    x_trend = as_tensor(x_trend)
    if x_trend.ndim != 3 or x_trend.shape[-1] != p.channels:
        raise ShapeError(f"project_qkv: input {x_trend.shape} does not match C={p.channels}")
    return matmul(x_trend, p.Wq), matmul(x_trend, p.Wk), matmul(x_trend, p.Wv)


def interaction_spectrum(Q, K, eps: float = 1e-8) -> ComplexSpectrum:
    """Normalized rfft(Q) * rfft(K) per (batch, feature) slice, time on the last axis."""
    sq = rfft(transpose(as_tensor(Q), (0, 2, 1)))
    sk = rfft(transpose(as_tensor(K), (0, 2, 1)))
    prod = complex_mul(sq, sk)
    power = sum_(add(mul(prod.re, prod.re), mul(prod.im, prod.im)), axis=-1, keepdims=True)
    norm = add(sqrt(power), eps)
    return ComplexSpectrum(div(prod.re, norm), div(prod.im, norm), prod.n)


def freq_interaction(Q, K, eps: float = 1e-8) -> Tensor:
    """Time-domain [B, L, d] signal of the normalized Q-K spectral product."""
    Q = as_tensor(Q)
    if Q.ndim != 3 or Q.shape != as_tensor(K).shape:
        raise ShapeError(f"freq_interaction: Q {Q.shape} and K {as_tensor(K).shape} must match as [B, L, d]")
    s = interaction_spectrum(Q, K, eps)
    return transpose(irfft(s, Q.shape[1]), (0, 2, 1))


def attention_scores(phi_hat: Tensor, d: int) -> Tensor:
    # broadcasting against an all-ones tensor of the same shape is the identity,
    # so scores are a softmax over time of phi_hat / sqrt(d)
    return softmax(scale(phi_hat, 1.0 / math.sqrt(d)), axis=1)


def activate_values(V: Tensor, limit: float) -> Tensor:
    """clamp_max(exp(V), limit) without overflowing exp for very large V.

    The inner clamp sits above log(limit), so values and gradients equal the
    plain composition.
    """
    guarded = clamp_max(V, math.log(limit) + 1.0)
    return clamp_max(exp(guarded), limit)


def efa_forward(x_trend, p: EfaParams) -> Tensor:
    """[B, L, C] -> [B, L, C] Enhanced Frequency Attention."""
    for name, t in p.tensors().items():
        if not np.isfinite(t.data).all():
            raise NonFiniteError(f"efa_forward: parameter {name} is not finite")
    Q, K, V = project_qkv(x_trend, p)
    phi_hat = freq_interaction(Q, K, p.eps)
    scores = attention_scores(phi_hat, p.d)
    weighted = mul(scores, activate_values(V, p.clamp_max))
    return weighted if p.Wo is None else matmul(weighted, p.Wo)


def attention_param_count(h: int, d_model: int, d_k: int) -> int:
    """Projection parameters of standard multi-head attention: 3*h*d_model*d_k."""
    for name, v in (("h", h), ("d_model", d_model), ("d_k", d_k)):
        if int(v) != v or v < 1:
            raise ValueError(f"attention_param_count: {name} must be a positive integer, got {v}")
    return 3 * int(h) * int(d_model) * int(d_k)


def efa_param_count(channels: int, d: int, project_out: bool = True) -> int:
    return 3 * channels * d + (d * channels if project_out else 0)
