"""Seasonal-branch frequency filters and their GELU-gated cross fusion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .spectral import ComplexSpectrum, complex_mul, irfft, num_bins, real_edges, rfft
from .tensor import Tensor, add, as_tensor, gelu, matmul, mul, relu, sub, transpose


@dataclass
class PaiKernel:
    """Static per-bin complex gain."""

    re: Tensor
    im: Tensor

    @property
    def bins(self) -> int:
        return self.re.shape[-1]

    def tensors(self) -> dict[str, Tensor]:
        return {"re": self.re, "im": self.im}


@dataclass
class ComplexLinear:
    w_re: Tensor
    w_im: Tensor
    b_re: Tensor
    b_im: Tensor

    @property
    def bins_in(self) -> int:
        return self.w_re.shape[0]

    @property
    def bins_out(self) -> int:
        return self.w_re.shape[1]

    def __call__(self, re: Tensor, im: Tensor) -> tuple[Tensor, Tensor]:
        # (a + ib)(W + iU) = (aW - bU) + i(aU + bW)
        out_re = add(sub(matmul(re, self.w_re), matmul(im, self.w_im)), self.b_re)
        out_im = add(add(matmul(re, self.w_im), matmul(im, self.w_re)), self.b_im)
        return out_re, out_im


@dataclass
class TexNet:
    """Complex-valued MLP mapping a spectrum to per-bin filter weights.

    ReLU acts on the real and imaginary planes separately between layers;
    the last layer is linear. Weights are shared across channels.
    """

    layers: list[ComplexLinear] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("TexNet: at least one layer is required")
        for i, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.bins_out != b.bins_in:
                raise ShapeError(
                    f"TexNet: layer {i} outputs {a.bins_out} bins but layer {i + 1} expects {b.bins_in}"
                )
        if self.layers[0].bins_in != self.layers[-1].bins_out:
            raise ShapeError("TexNet: first input width must equal last output width")

    @property
    def bins(self) -> int:
        return self.layers[0].bins_in

    def __call__(self, s: ComplexSpectrum) -> ComplexSpectrum:
        re, im = s.re, s.im
        for i, layer in enumerate(self.layers):
            re, im = layer(re, im)
            if i < len(self.layers) - 1:
                re, im = relu(re), relu(im)
        return ComplexSpectrum(re, im, s.n)

    def tensors(self) -> dict[str, Tensor]:
        out = {}
        for i, layer in enumerate(self.layers):
            out.update({
                f"layer{i}.w_re": layer.w_re, f"layer{i}.w_im": layer.w_im,
                f"layer{i}.b_re": layer.b_re, f"layer{i}.b_im": layer.b_im,
            })
        return out


def init_pai(length: int, rng: np.random.Generator, std: float = 0.02) -> PaiKernel:
    bins = num_bins(length)
    return PaiKernel(
        re=Tensor(1.0 + rng.normal(0.0, std, bins), requires_grad=True),
        im=Tensor(rng.normal(0.0, std, bins), requires_grad=True),
    )


def init_texnet(length: int, rng: np.random.Generator, n_layers: int = 2,
                hidden: int | None = None, std: float = 0.02) -> TexNet:
    bins = num_bins(length)
    hidden = bins if hidden is None else hidden
    widths = [bins] + [hidden] * (n_layers - 1) + [bins]
    layers = []
    for fan_in, fan_out in zip(widths, widths[1:]):
        layers.append(ComplexLinear(
            w_re=Tensor(rng.normal(0.0, std, (fan_in, fan_out)), requires_grad=True),
            w_im=Tensor(rng.normal(0.0, std, (fan_in, fan_out)), requires_grad=True),
            b_re=Tensor(np.zeros(fan_out), requires_grad=True),
            b_im=Tensor(np.zeros(fan_out), requires_grad=True),
        ))
    return TexNet(layers)


def _time_last(x: Tensor) -> Tensor:
    if x.ndim != 3:
        raise ShapeError(f"expected [B, L, C], got shape {x.shape}")
    return transpose(x, (0, 2, 1))


def pai_filter(x, k: PaiKernel) -> Tensor:
    x = as_tensor(x)
    xt = _time_last(x)
    length = xt.shape[-1]
    if k.bins != num_bins(length):
        raise ShapeError(f"pai_filter: kernel has {k.bins} bins, L={length} needs {num_bins(length)}")
    s = rfft(xt)
    filtered = complex_mul(s, ComplexSpectrum(k.re, k.im, length))
    return transpose(irfft(real_edges(filtered), length), (0, 2, 1))


def tex_filter(x, net: TexNet) -> Tensor:
    x = as_tensor(x)
    xt = _time_last(x)
    length = xt.shape[-1]
    if net.bins != num_bins(length):
        raise ShapeError(f"tex_filter: net sized for {net.bins} bins, L={length} needs {num_bins(length)}")
    s = rfft(xt)
    filtered = complex_mul(s, net(s))
    return transpose(irfft(real_edges(filtered), length), (0, 2, 1))


def cross_fuse(a, b) -> Tensor:
    """a * GELU(b) + b * GELU(a); symmetric in its two arguments."""
    a, b = as_tensor(a), as_tensor(b)
    return add(mul(a, gelu(b)), mul(b, gelu(a)))


def cross_integrate(x_season, k: PaiKernel, net: TexNet) -> Tensor:
    return cross_fuse(tex_filter(x_season, net), pai_filter(x_season, k))
