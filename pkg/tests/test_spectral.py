import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from conftest import brute_dft
from xlinear.errors import ShapeError, SpectrumError
from xlinear.spectral import (
    CONVENTION, ComplexSpectrum, complex_mul, energy, fft_complex, ifft_complex, irfft, num_bins,
    real_edges, rfft, spectrum,
)
from xlinear.tensor import Tensor, gradient_check, sum_, mul, square

SIZES = (4, 8, 12, 64, 96, 1000)


def test_convention_tag():
    assert CONVENTION == "forward-unnormalized/inverse-1/n"


def test_impulse_flat():
    re, im = fft_complex([1, 0, 0, 0], [0, 0, 0, 0])
    np.testing.assert_allclose(re, [1, 1, 1, 1], atol=1e-15)
    np.testing.assert_allclose(im, 0, atol=1e-15)


def test_constant_dc_only():
    re, im = fft_complex([1, 1, 1, 1], [0, 0, 0, 0])
    np.testing.assert_allclose(re, [4, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(im, 0, atol=1e-15)


@pytest.mark.parametrize("n", SIZES + (1, 2, 3, 5, 7, 17, 31, 97, 128, 255))
def test_fft_complex_matches_brute_force(n):
    rng = np.random.default_rng(n)
    re, im = rng.normal(size=(2, 3, n))
    got_re, got_im = fft_complex(re, im)
    ref = brute_dft(re + 1j * im)
    np.testing.assert_allclose(got_re, ref.real, atol=1e-9, rtol=0)
    np.testing.assert_allclose(got_im, ref.imag, atol=1e-9, rtol=0)


@pytest.mark.parametrize("n", SIZES + (2, 3, 7, 33))
def test_rfft_matches_brute_force(n):
    rng = np.random.default_rng(100 + n)
    x = rng.normal(size=(2, 3, n))
    s = rfft(Tensor(x))
    ref = brute_dft(x)[..., : num_bins(n)]
    np.testing.assert_allclose(s.re.data, ref.real, atol=1e-9, rtol=0)
    np.testing.assert_allclose(s.im.data, ref.imag, atol=1e-9, rtol=0)


@pytest.mark.parametrize("n", SIZES + (3, 7, 33))
def test_round_trip(n):
    x = np.random.default_rng(n).normal(size=(4, n))
    np.testing.assert_allclose(irfft(rfft(Tensor(x))).data, x, atol=1e-9, rtol=0)


@pytest.mark.parametrize("n", SIZES)
def test_ifft_complex_inverts(n):
    rng = np.random.default_rng(n + 7)
    re, im = rng.normal(size=(2, n))
    back = ifft_complex(*fft_complex(re, im))
    np.testing.assert_allclose(back[0], re, atol=1e-9)
    np.testing.assert_allclose(back[1], im, atol=1e-9)


@pytest.mark.parametrize("n", (8, 12, 96, 1000))
def test_parseval(n):
    x = np.random.default_rng(n).normal(size=n)
    e = energy(rfft(Tensor(x)))
    weights = np.full(num_bins(n), 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    assert abs(np.sum(x * x) - np.sum(weights * e) / n) < 1e-8


def test_cosine_bin_one():
    L = 8
    t = np.arange(L)
    s = rfft(Tensor(np.cos(2 * np.pi * t / L)))
    assert s.re.data[1] == pytest.approx(4.0, abs=1e-12)
    rest = np.concatenate([np.delete(s.re.data, 1), s.im.data])
    assert np.abs(rest).max() < 1e-12


def test_zero_spectrum_and_signal():
    s = rfft(Tensor(np.zeros(10)))
    assert not s.re.data.any() and not s.im.data.any()
    assert not irfft(spectrum(np.zeros(5), np.zeros(5), 8)).data.any()


def test_irfft_constant():
    out = irfft(spectrum([4, 0, 0, 0, 0], np.zeros(5), 8))
    np.testing.assert_allclose(out.data, 0.5, atol=1e-15)


def test_irfft_rejects_non_real_dc():
    with pytest.raises(SpectrumError):
        irfft(spectrum([1, 0, 0], [0.5, 0, 0], 4))


def test_irfft_rejects_non_real_nyquist():
    with pytest.raises(SpectrumError):
        irfft(spectrum([1, 0, 0], [0, 0, 0.1], 4))


def test_irfft_bin_mismatch():
    with pytest.raises(SpectrumError):
        irfft(spectrum(np.zeros(5), np.zeros(5), 8), n=12)


def test_spectrum_invariants_hold():
    for n in (7, 8):
        s = rfft(Tensor(np.random.default_rng(n).normal(size=n)))
        assert s.re.shape[-1] == s.im.shape[-1] == n // 2 + 1
        assert s.im.data[0] == 0.0
        if n % 2 == 0:
            assert s.im.data[-1] == 0.0


def test_length_errors():
    with pytest.raises(SpectrumError):
        fft_complex([], [])
    with pytest.raises(SpectrumError):
        rfft(Tensor([1.0]))
    with pytest.raises(ShapeError):
        fft_complex([1, 2], [1])


def test_complex_mul_identity_and_i_squared():
    b = spectrum([1.0, 2.0, -3.0], [0.0, 0.5, 0.0], 4)
    one = spectrum(np.ones(3), np.zeros(3), 4)
    out = complex_mul(one, b)
    assert np.array_equal(out.re.data, b.re.data) and np.array_equal(out.im.data, b.im.data)
    i = spectrum(np.zeros(3), np.ones(3), 4)
    sq = complex_mul(i, i)
    assert np.array_equal(sq.re.data, -np.ones(3)) and np.array_equal(sq.im.data, np.zeros(3))


def test_complex_mul_schoolbook():
    rng = np.random.default_rng(3)
    ar, ai, br, bi = rng.normal(size=(4, 2, 9))
    out = complex_mul(spectrum(ar, ai, 16), spectrum(br, bi, 16))
    for j in range(2):
        for k in range(9):
            assert out.re.data[j, k] == ar[j, k] * br[j, k] - ai[j, k] * bi[j, k]
            assert out.im.data[j, k] == ar[j, k] * bi[j, k] + ai[j, k] * br[j, k]


def test_complex_mul_bin_mismatch():
    with pytest.raises(SpectrumError):
        complex_mul(spectrum(np.zeros(3), np.zeros(3), 4), spectrum(np.zeros(5), np.zeros(5), 8))


def test_real_edges_projection():
    s = real_edges(spectrum(np.ones(5), np.ones(5), 8))
    assert np.array_equal(s.im.data, [0, 1, 1, 1, 0])
    s = real_edges(spectrum(np.ones(4), np.ones(4), 7))
    assert np.array_equal(s.im.data, [0, 1, 1, 1])


def test_complex_spectrum_validates():
    with pytest.raises(SpectrumError):
        ComplexSpectrum(Tensor(np.zeros(4)), Tensor(np.zeros(4)), 8)
    with pytest.raises(ShapeError):
        ComplexSpectrum(Tensor(np.zeros(5)), Tensor(np.zeros(4)), 8)


@pytest.mark.parametrize("n", (8, 12, 7, 96))
def test_adjoint_consistency(n):
    rng = np.random.default_rng(n)
    x = rng.normal(size=(2, n))
    kr, ki = rng.normal(size=(2, num_bins(n)))
    w = rng.normal(size=(2, n))

    def f(x, kr, ki):
        out = irfft(real_edges(complex_mul(rfft(x), ComplexSpectrum(kr, ki, n))), n)
        return sum_(mul(out, Tensor(w)))

    assert gradient_check(f, x, kr, ki) < 1e-4


@pytest.mark.parametrize("n", (8, 9))
def test_rfft_gradient_matches_dense_adjoint(n):
    # the rfft is a linear map; its gradient is the transposed DFT matrix
    rng = np.random.default_rng(n)
    x = Tensor(rng.normal(size=n), requires_grad=True)
    gr, gi = rng.normal(size=(2, num_bins(n)))
    s = rfft(x)
    from xlinear.tensor import add, backward
    backward(add(sum_(mul(s.re, Tensor(gr))), sum_(mul(s.im, Tensor(gi)))))
    t = np.arange(n)
    k = np.arange(num_bins(n))
    C = np.cos(2 * np.pi * np.outer(k, t) / n)
    S = -np.sin(2 * np.pi * np.outer(k, t) / n)
    np.testing.assert_allclose(x.grad, gr @ C + gi @ S, atol=1e-10)


@given(st.integers(2, 70), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31 - 1))
def test_linearity(n, a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n))
    lhs = rfft(Tensor(a * x + b * y))
    sx, sy = rfft(Tensor(x)), rfft(Tensor(y))
    np.testing.assert_allclose(lhs.re.data, a * sx.re.data + b * sy.re.data, atol=1e-9)
    np.testing.assert_allclose(lhs.im.data, a * sx.im.data + b * sy.im.data, atol=1e-9)


@given(hnp.arrays(np.float64, st.integers(2, 130), elements=st.floats(-100, 100)))
def test_round_trip_property(x):
    np.testing.assert_allclose(irfft(rfft(Tensor(x))).data, x, atol=1e-9 * max(1.0, np.abs(x).max()))


@given(st.integers(1, 64), st.integers(0, 2**31 - 1))
def test_fft_any_length_property(n, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    re, im = fft_complex(z.real, z.imag)
    ref = brute_dft(z)
    np.testing.assert_allclose(re + 1j * im, ref, atol=1e-9)
