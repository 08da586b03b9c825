import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp
from scipy.special import erf

from xlinear.crossfilter import (
    ComplexLinear, PaiKernel, TexNet, cross_fuse, cross_integrate, init_pai, init_texnet, pai_filter,
    tex_filter,
)
from xlinear.errors import ShapeError
from xlinear.spectral import num_bins
from xlinear.tensor import Tensor, backward, gradient_check, mul, sum_
from xlinear.training import AdamState, TrainConfig, adam_step, mse_loss


def _gelu(x):
    return x * 0.5 * (1.0 + erf(x / math.sqrt(2.0)))


def _pai(re, im):
    return PaiKernel(Tensor(np.asarray(re, float)), Tensor(np.asarray(im, float)))


def _layer(w_re, w_im, b_re, b_im):
    return ComplexLinear(*(Tensor(np.asarray(a, float)) for a in (w_re, w_im, b_re, b_im)))


def _identity_net(bins):
    return TexNet([_layer(np.zeros((bins, bins)), np.zeros((bins, bins)), np.ones(bins), np.zeros(bins))])


def test_pai_identity_and_zero(rng):
    x = rng.normal(size=(2, 12, 3))
    b = num_bins(12)
    np.testing.assert_allclose(pai_filter(x, _pai(np.ones(b), np.zeros(b))).data, x, atol=1e-9)
    assert np.abs(pai_filter(x, _pai(np.zeros(b), np.zeros(b))).data).max() < 1e-15


def test_pai_dc_pass():
    L = 16
    x = (2.5 + np.cos(2 * np.pi * 3 * np.arange(L) / L)).reshape(1, L, 1)
    re = np.zeros(num_bins(L))
    re[0] = 1.0
    out = pai_filter(x, _pai(re, np.zeros_like(re)))
    np.testing.assert_allclose(out.data, 2.5, atol=1e-12)


@pytest.mark.parametrize("L,z", [(16, 3), (96, 7), (15, 4)])
def test_pai_tone_zeroing(L, z):
    x = np.sin(2 * np.pi * z * np.arange(L) / L + 0.3).reshape(1, L, 1)
    re = np.ones(num_bins(L))
    re[z] = 0.0
    out = pai_filter(x, _pai(re, np.zeros_like(re)))
    assert np.linalg.norm(out.data) < 1e-8 * np.linalg.norm(x)


def test_pai_size_mismatch():
    with pytest.raises(ShapeError):
        pai_filter(np.zeros((1, 8, 1)), _pai(np.ones(3), np.zeros(3)))


def test_tex_identity_composition(rng):
    L = 10
    b = num_bins(L)
    x = rng.normal(size=(1, L, 1))
    np.testing.assert_allclose(tex_filter(x, _identity_net(b)).data, x, atol=1e-9)
    # identity weight matrix with a bias cancelling this input's spectrum
    s = np.fft.rfft(x[0, :, 0])
    net = TexNet([_layer(np.eye(b), np.zeros((b, b)), 1.0 - s.real, -s.imag)])
    np.testing.assert_allclose(tex_filter(x, net).data, x, atol=1e-9)


def test_tex_zero_input(rng):
    net = init_texnet(8, rng)
    assert not tex_filter(np.zeros((2, 8, 3)), net).data.any()


def test_tex_hand_unrolled_oracle():
    L = 4
    x = np.array([0.5, -1.0, 2.0, 0.25])
    w_re = np.array([[0.3, -0.2, 0.1], [0.05, 0.4, -0.3], [0.2, 0.1, 0.6]])
    w_im = np.array([[-0.1, 0.2, 0.0], [0.3, -0.05, 0.15], [0.0, 0.25, -0.2]])
    b_re = np.array([0.1, 0.0, -0.2])
    b_im = np.array([0.0, 0.3, 0.05])
    net = TexNet([_layer(w_re, w_im, b_re, b_im)])
    out = tex_filter(x.reshape(1, L, 1), net).data.ravel()

    # schoolbook: s_k = sum_t x_t e^{-2 pi i k t / L}; w_j = sum_k s_k W_kj + b_j
    s = [sum(x[t] * complex(math.cos(2 * math.pi * k * t / L), -math.sin(2 * math.pi * k * t / L))
             for t in range(L)) for k in range(3)]
    w = [sum(s[k] * complex(w_re[k, j], w_im[k, j]) for k in range(3)) + complex(b_re[j], b_im[j])
         for j in range(3)]
    f = [s[k] * w[k] for k in range(3)]
    f[0] = complex(f[0].real, 0.0)
    f[2] = complex(f[2].real, 0.0)
    full = f + [f[1].conjugate()]
    ref = [sum(full[k] * complex(math.cos(2 * math.pi * k * t / L), math.sin(2 * math.pi * k * t / L))
               for k in range(L)).real / L for t in range(L)]
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_texnet_layer_validation(rng):
    a = _layer(np.zeros((5, 4)), np.zeros((5, 4)), np.zeros(4), np.zeros(4))
    b = _layer(np.zeros((3, 5)), np.zeros((3, 5)), np.zeros(5), np.zeros(5))
    with pytest.raises(ShapeError):
        TexNet([a, b])
    with pytest.raises(ShapeError):
        TexNet([])
    with pytest.raises(ShapeError):
        tex_filter(np.zeros((1, 12, 1)), init_texnet(8, rng))


def test_texnet_defaults(rng):
    net = init_texnet(96, rng)
    assert len(net.layers) == 2
    assert net.layers[0].w_re.shape == (49, 49)
    assert not net.layers[0].b_re.data.any()
    assert abs(net.layers[0].w_re.data.std() - 0.02) < 0.002
    k = init_pai(96, rng)
    assert abs(k.re.data.mean() - 1.0) < 0.01 and abs(k.im.data.mean()) < 0.01


def test_cross_zero_input(rng):
    L = 8
    assert not cross_integrate(np.zeros((1, L, 2)), init_pai(L, rng), init_texnet(L, rng)).data.any()


def test_identity_filters_recover_gelu_form(rng):
    L = 12
    x = rng.normal(size=(2, L, 3))
    b = num_bins(L)
    out = cross_integrate(x, _pai(np.ones(b), np.zeros(b)), _identity_net(b))
    np.testing.assert_allclose(out.data, 2 * x * _gelu(x), atol=1e-9)


@given(hnp.arrays(np.float64, (2, 5), elements=st.floats(-8, 8)),
       hnp.arrays(np.float64, (2, 5), elements=st.floats(-8, 8)))
def test_exchange_symmetry(a, b):
    assert np.array_equal(cross_fuse(a, b).data, cross_fuse(b, a).data)


def test_gradient_flow(rng):
    L = 8
    k = init_pai(L, rng, std=0.3)
    net = init_texnet(L, rng, std=0.3)
    x = rng.normal(size=(1, L, 2))
    w = Tensor(rng.normal(size=(1, L, 2)))
    l0, l1 = net.layers

    def f(x, kr, ki, a, b, c, d, e, g, h, i):
        n = TexNet([ComplexLinear(a, b, c, d), ComplexLinear(e, g, h, i)])
        return sum_(mul(cross_integrate(x, PaiKernel(kr, ki), n), w))

    args = [x, k.re, k.im, l0.w_re, l0.w_im, l0.b_re, l0.b_im, l1.w_re, l1.w_im, l1.b_re, l1.b_im]
    assert gradient_check(f, *args) < 1e-4


def test_denoising_oracle():
    # fit one fixed noisy tone; per-bin gains on a single input can shape any output
    L = 64
    t = np.arange(L)
    clean = np.sin(2 * np.pi * 3 * t / L).reshape(1, L, 1)
    y = clean + np.random.default_rng(0).normal(0.0, 0.3, clean.shape)
    rng = np.random.default_rng(0)
    k, net = init_pai(L, rng), init_texnet(L, rng)
    params = {**{f"pai.{n}": p for n, p in k.tensors().items()},
              **{f"tex.{n}": p for n, p in net.tensors().items()}}
    state, cfg = AdamState(), TrainConfig(lr=0.01)
    for _ in range(500):
        backward(mse_loss(cross_integrate(y, k, net), clean))
        adam_step(params, state, cfg)
    fitted = float(np.mean((cross_integrate(y, k, net).data - clean) ** 2))
    assert fitted < float(np.mean((y - clean) ** 2))
