"""
Frequency attention on the trend
================================

Q and K meet in the frequency domain. Multiplying spectra squares
magnitudes, so the dominant low bin gets stronger relative to the rest.
"""

# %%
import numpy as np

from xlinear.efa import attention_param_count, efa_forward, efa_param_count, init_efa, interaction_spectrum
from xlinear.spectral import energy, rfft
from xlinear.tensor import Tensor

L = 96
t = np.arange(L)
sig = np.cos(2 * np.pi * t / L) + 0.2 * np.cos(2 * np.pi * (L // 4) * t / L)
before = energy(rfft(Tensor(sig)))
after = energy(interaction_spectrum(sig.reshape(1, L, 1), sig.reshape(1, L, 1)))[0, 0]
print(f"bin-1 energy share: {before[1] / before.sum():.3f} -> {after[1] / after.sum():.4f}")

# %%
rng = np.random.default_rng(0)
p = init_efa(7, 16, rng)
out = efa_forward(rng.normal(size=(4, L, 7)), p)
print(out.shape)

# %%
print("EFA params, C=7 d=16:", efa_param_count(7, 16))
print("full attention, h=8 d_model=512 d_k=64:", attention_param_count(8, 512, 64))
