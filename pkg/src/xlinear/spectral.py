"""Discrete Fourier transforms for real signals, differentiable end to end.

Convention: the forward transform is unnormalized and the inverse carries
the 1/n factor. Power-of-two lengths run an iterative radix-2 Cooley-Tukey
butterfly; every other length is reduced to a power-of-two circular
convolution with Bluestein's chirp-z trick. Transforms act on the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ShapeError, SpectrumError
from .tensor import Tensor, _check_finite, _result, add, as_tensor, mul, slice_, sub

CONVENTION = "forward-unnormalized/inverse-1/n"


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


_LEAF = 16


@lru_cache(maxsize=None)
def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(size: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    m = np.exp(-2j * np.pi * np.outer(k, k) / n)
    m.setflags(write=False)
    return m


def _radix2(z: np.ndarray) -> np.ndarray:
    """Decimation-in-time radix-2 FFT along the last axis (n a power of two).

    The even/odd splitting recursion is flattened: the leaves (length
    ``_LEAF`` subsequences z[r::n/leaf]) are transformed directly, placed in
    bit-reversed order, and merged with butterflies
    X[k] = E[k] + W^k O[k], X[k + N/2] = E[k] - W^k O[k].
    """
    n = z.shape[-1]
    lead = z.shape[:-1]
    leaf = min(n, _LEAF)
    groups = n // leaf
    # leaves[..., r, :] = DFT of z[r::groups]
    leaves = np.swapaxes(z.reshape(*lead, leaf, groups), -1, -2) @ _dft_matrix(leaf)
    z = leaves[..., _bit_reverse(groups), :].reshape(*lead, n)
    size = 2 * leaf
    while size <= n:
        half = size // 2
        blocks = z.reshape(*lead, n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(size)
        out = np.empty_like(blocks)
        np.add(even, odd, out=out[..., :half])
        np.subtract(even, odd, out=out[..., half:])
        z = out.reshape(*lead, n)
        size *= 2
    return z


@lru_cache(maxsize=None)
def _chirp(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    m = 1
    while m < 2 * n - 1:
        m *= 2
    k = np.arange(n)
    # n^2 mod 2n keeps the phase argument small for large n
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    b = np.zeros(m, dtype=complex)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:])[::-1]
    b_hat = _radix2(b)
    chirp.setflags(write=False)
    b_hat.setflags(write=False)
    return chirp, b_hat, m


def _bluestein(z: np.ndarray) -> np.ndarray:
    n = z.shape[-1]
    chirp, b_hat, m = _chirp(n)
    a = np.zeros(z.shape[:-1] + (m,), dtype=complex)
    a[..., :n] = z * chirp
    conv = _ifft_pow2(_radix2(a) * b_hat)
    return conv[..., :n] * chirp


def _ifft_pow2(z: np.ndarray) -> np.ndarray:
    return np.conj(_radix2(np.conj(z))) / z.shape[-1]


def _fft(z: np.ndarray) -> np.ndarray:
    n = z.shape[-1]
    if n == 1:
        return z.astype(complex)
    if _is_pow2(n):
        return _radix2(z.astype(complex))
    return _bluestein(z.astype(complex))


def _ifft(z: np.ndarray) -> np.ndarray:
    return np.conj(_fft(np.conj(z))) / z.shape[-1]


def fft_complex(re, im) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized DFT of ``re + i*im`` along the last axis (plain arrays)."""
    re = np.asarray(re, dtype=np.float64)
    im = np.asarray(im, dtype=np.float64)
    if re.shape != im.shape:
        raise ShapeError(f"fft_complex: real/imag shapes differ: {re.shape} vs {im.shape}")
    if re.ndim == 0 or re.shape[-1] == 0:
        raise SpectrumError("fft_complex: signal length must be at least 1")
    out = _fft(re + 1j * im)
    return out.real.copy(), out.imag.copy()


def ifft_complex(re, im) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`fft_complex` (includes the 1/n factor)."""
    re = np.asarray(re, dtype=np.float64)
    im = np.asarray(im, dtype=np.float64)
    if re.shape != im.shape:
        raise ShapeError(f"ifft_complex: real/imag shapes differ: {re.shape} vs {im.shape}")
    if re.ndim == 0 or re.shape[-1] == 0:
        raise SpectrumError("ifft_complex: signal length must be at least 1")
    out = _ifft(re + 1j * im)
    return out.real.copy(), out.imag.copy()


def num_bins(n: int) -> int:
    return n // 2 + 1


def _edge_bins(n: int) -> list[int]:
    return [0, n // 2] if n % 2 == 0 else [0]


@lru_cache(maxsize=None)
def _half_twiddles(n: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(n // 2 + 1) / n)
    w.setflags(write=False)
    return w


def _rfft_array(x: np.ndarray) -> np.ndarray:
    """One-sided spectrum of real rows; even n packs pairs into one n/2 FFT."""
    n = x.shape[-1]
    if n % 2:
        spec = _fft(x)[..., : num_bins(n)]
    else:
        h = n // 2
        z = _fft(x[..., 0::2] + 1j * x[..., 1::2])
        zk = np.concatenate([z, z[..., :1]], axis=-1)
        zc = np.conj(np.concatenate([z[..., :1], z[..., :0:-1], z[..., :1]], axis=-1))
        even = 0.5 * (zk + zc)
        odd = -0.5j * (zk - zc)
        spec = even + _half_twiddles(n) * odd
    # exact conjugate symmetry: DC (and Nyquist) are real for real input
    spec.imag[..., _edge_bins(n)] = 0.0
    return spec


def _irfft_array(re: np.ndarray, im: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`_rfft_array` (imaginary parts at DC/Nyquist ignored)."""
    bins = num_bins(n)
    X = re + 1j * im
    X[..., _edge_bins(n)] = X[..., _edge_bins(n)].real
    if n % 2:
        full = np.zeros(re.shape[:-1] + (n,), dtype=complex)
        full[..., :bins] = X
        full[..., bins:] = np.conj(X[..., 1:][..., ::-1])
        return _ifft(full).real
    h = n // 2
    Xr = np.conj(X[..., ::-1])[..., :h]  # conj(X[h - k]) for k < h
    even = 0.5 * (X[..., :h] + Xr)
    odd = 0.5 * (X[..., :h] - Xr) * np.conj(_half_twiddles(n)[:h])
    z = _ifft(even + 1j * odd)
    out = np.empty(re.shape[:-1] + (n,))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


@dataclass(frozen=True)
class ComplexSpectrum:
    """One-sided spectrum of a length-``n`` real signal, as two real planes."""

    re: Tensor
    im: Tensor
    n: int

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise ShapeError(f"ComplexSpectrum: planes differ: {self.re.shape} vs {self.im.shape}")
        if self.re.shape[-1] != num_bins(self.n):
            raise SpectrumError(
                f"ComplexSpectrum: {self.re.shape[-1]} bins but n={self.n} needs {num_bins(self.n)}"
            )

    @property
    def bins(self) -> int:
        return num_bins(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.re.shape

    def to_complex(self) -> np.ndarray:
        return self.re.data + 1j * self.im.data


def rfft(x) -> ComplexSpectrum:
    """One-sided DFT of a real tensor along its last axis."""
    x = as_tensor(x)
    n = x.shape[-1] if x.ndim else 0
    if n < 2:
        raise SpectrumError(f"rfft: need a last axis of length >= 2, got shape {x.shape}")
    _check_finite("rfft", x)
    spec = _rfft_array(x.data)
    bins = spec.shape[-1]
    adjoint = np.full(bins, n / 2.0)
    adjoint[_edge_bins(n)] = float(n)

    def bw(g):
        # d re[k]/d x[t] = cos(2 pi k t/n), d im[k]/d x[t] = -sin(2 pi k t/n):
        # the adjoint is n * irfft with the 1/n-and-doubling weights undone
        g_re, g_im = g[..., 0, :], g[..., 1, :].copy()
        g_im[..., _edge_bins(n)] = 0.0
        return (_irfft_array(g_re * adjoint, g_im * adjoint, n),)

    packed = _result(np.stack([spec.real, spec.imag], axis=-2), (x,), bw)
    re = slice_(packed, (Ellipsis, 0, slice(None)))
    im = slice_(packed, (Ellipsis, 1, slice(None)))
    return ComplexSpectrum(re, im, n)


def irfft(s: ComplexSpectrum, n: int | None = None) -> Tensor:
    """Real signal of length ``n`` whose one-sided spectrum is ``s``."""
    n = s.n if n is None else int(n)
    if s.re.shape[-1] != num_bins(n):
        raise SpectrumError(f"irfft: {s.re.shape[-1]} bins do not match n={n}")
    edges = s.im.data[..., _edge_bins(n)]
    if np.any(edges != 0.0):
        raise SpectrumError(
            "irfft: imaginary part at DC"
            + (" or Nyquist" if n % 2 == 0 else "")
            + " must be zero for a real signal"
        )
    _check_finite("irfft", s.re, s.im)
    out = _irfft_array(s.re.data, s.im.data, n)
    weight = np.full(num_bins(n), 2.0 / n)
    weight[_edge_bins(n)] = 1.0 / n

    def bw(g):
        gs = _rfft_array(g)
        return gs.real * weight, gs.imag * weight

    return _result(out, (s.re, s.im), bw)


def complex_mul(a: ComplexSpectrum, b: ComplexSpectrum) -> ComplexSpectrum:
    """Per-bin complex product; leading axes broadcast."""
    if a.bins != b.bins:
        raise SpectrumError(f"complex_mul: bin counts differ: {a.bins} vs {b.bins}")
    re = sub(mul(a.re, b.re), mul(a.im, b.im))
    im = add(mul(a.re, b.im), mul(a.im, b.re))
    return ComplexSpectrum(re, im, a.n)


def real_edges(s: ComplexSpectrum) -> ComplexSpectrum:
    """Zero the imaginary part at DC (and Nyquist for even n).

    Those bins are real for any real signal; learned complex weights can
    leave them non-real, so filters project before inverting.
    """
    mask = np.ones(s.bins)
    mask[_edge_bins(s.n)] = 0.0
    return ComplexSpectrum(s.re, mul(s.im, Tensor(mask)), s.n)


def spectrum(re, im, n: int) -> ComplexSpectrum:
    """Wrap raw arrays or tensors as a :class:`ComplexSpectrum`."""
    return ComplexSpectrum(as_tensor(re), as_tensor(im), int(n))


def energy(s: ComplexSpectrum) -> np.ndarray:
    """Per-bin squared magnitude |X[k]|^2 (plain array)."""
    return s.re.data ** 2 + s.im.data ** 2
