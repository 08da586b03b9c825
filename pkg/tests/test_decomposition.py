import numpy as np
import pytest
from hypothesis import given, strategies as st

from xlinear.decomposition import DEFAULT_KERNEL, decompose, moving_average
from xlinear.errors import ConfigError, ShapeError
from xlinear.tensor import Tensor, gradient_check, mul, sum_


def _series(values):
    return np.asarray(values, dtype=float).reshape(1, -1, 1)


def _loop_trend(x, k):
    # independent oracle: explicit replicate padding and a Python window loop
    half = (k - 1) // 2
    padded = [x[0]] * half + list(x) + [x[-1]] * half
    return np.array([sum(padded[t : t + k]) / k for t in range(len(x))])


def test_default_kernel():
    assert DEFAULT_KERNEL == 25


def test_hand_computed_example():
    pair = decompose(_series([1, 2, 3, 4, 5]), 3)
    np.testing.assert_allclose(pair.trend.data.ravel(), [4 / 3, 2, 3, 4, 14 / 3], atol=1e-15)
    np.testing.assert_allclose(pair.seasonal.data.ravel(), [-1 / 3, 0, 0, 0, 1 / 3], atol=1e-15)


@pytest.mark.parametrize("k", [1, 3, 25, 39])
def test_constant_series(k):
    pair = decompose(np.full((2, 20, 3), 4.25), k)
    np.testing.assert_allclose(pair.trend.data, 4.25, atol=1e-14)
    np.testing.assert_allclose(pair.seasonal.data, 0.0, atol=1e-14)


def test_window_of_one_is_identity():
    x = np.random.default_rng(0).normal(size=(2, 10, 3))
    pair = decompose(x, 1)
    np.testing.assert_allclose(pair.trend.data, x, atol=1e-15)
    np.testing.assert_allclose(pair.seasonal.data, 0.0, atol=1e-15)


@pytest.mark.parametrize("k", [2, 0, -1, 40])
def test_bad_kernels(k):
    with pytest.raises(ConfigError):
        decompose(np.zeros((1, 20, 1)), k)


def test_needs_3d():
    with pytest.raises(ShapeError):
        moving_average(np.zeros((20, 1)), 3)


@pytest.mark.parametrize("k", range(1, 26, 2))
def test_reconstruction_and_loop_oracle(k):
    x = np.random.default_rng(k).normal(size=(3, 30, 2))
    pair = decompose(x, k)
    np.testing.assert_allclose(pair.trend.data + pair.seasonal.data, x, atol=1e-12, rtol=0)
    for b in range(3):
        for c in range(2):
            np.testing.assert_allclose(pair.trend.data[b, :, c], _loop_trend(x[b, :, c], k), atol=1e-12)


def test_kernel_larger_than_length():
    # k up to 2L-1 is allowed; padding repeats the edges (k-1)/2 times
    x = np.array([1.0, 5.0, 2.0])
    pair = decompose(_series(x), 5)
    np.testing.assert_allclose(pair.trend.data.ravel(), _loop_trend(x, 5), atol=1e-15)


@given(st.integers(0, 2**31 - 1), st.sampled_from([3, 5, 7, 9]), st.integers(1, 6))
def test_shift_equivariance_interior(seed, k, shift):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=40 + shift)
    a = decompose(_series(base[:40]), k).trend.data.ravel()
    b = decompose(_series(base[shift : 40 + shift]), k).trend.data.ravel()
    half = (k - 1) // 2
    # b[t] == a[t + shift] whenever both windows stay inside the series
    for t in range(half, 40 - half - shift):
        assert abs(b[t] - a[t + shift]) < 1e-12


@given(st.floats(-5, 5), st.floats(-10, 10), st.sampled_from([3, 5, 25]))
def test_affine_series_has_no_interior_seasonal(a, b, k):
    t = np.arange(60.0)
    pair = decompose(_series(a * t + b), k)
    half = (k - 1) // 2
    np.testing.assert_allclose(pair.seasonal.data.ravel()[half : 60 - half], 0.0, atol=1e-10)


def test_differentiable():
    rng = np.random.default_rng(5)
    w = Tensor(rng.normal(size=(1, 8, 2)))
    f = lambda x: sum_(mul(decompose(x, 3).seasonal, w))
    assert gradient_check(f, rng.normal(size=(1, 8, 2))) < 1e-4
