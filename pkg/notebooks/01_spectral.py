"""
Real FFT and the one-sided spectrum
===================================

Radix-2 for powers of two, Bluestein for everything else.
"""

# %%
import numpy as np

from xlinear.spectral import energy, fft_complex, irfft, num_bins, rfft
from xlinear.tensor import Tensor

# a length-96 series is not a power of two, so this goes through Bluestein
L = 96
t = np.arange(L)
x = np.cos(2 * np.pi * 3 * t / L) + 0.5 * np.sin(2 * np.pi * 10 * t / L)
s = rfft(Tensor(x))
print("bins:", num_bins(L), s.shape)

# %%
# energy sits in bins 3 and 10
e = energy(s)
print("top bins:", np.argsort(e)[::-1][:2])

# %%
# compare against a direct sum, then invert
k = np.arange(L)
direct = x @ np.exp(-2j * np.pi * np.outer(k, k) / L)
print("max error vs direct DFT:", np.abs(s.to_complex() - direct[: num_bins(L)]).max())
print("round trip error:", np.abs(irfft(s).data - x).max())

# %%
re, im = fft_complex(np.ones(8), np.zeros(8))
print(re, im)  # all the mass in bin 0
