"""
Trend and seasonal parts
========================
"""

# %%
import numpy as np

from xlinear.decomposition import decompose

t = np.arange(200)
series = 0.02 * t + np.sin(2 * np.pi * t / 24) + np.random.default_rng(0).normal(0, 0.1, 200)
pair = decompose(series.reshape(1, -1, 1), 25)

trend = pair.trend.data.ravel()
seasonal = pair.seasonal.data.ravel()
print("reconstruction error:", np.abs(trend + seasonal - series).max())

# %%
# the trend follows the slope, the seasonal part keeps the daily cycle
slope = np.polyfit(t[20:180], trend[20:180], 1)[0]
print(f"trend slope {slope:.4f} (true 0.02)")
print(f"seasonal std {seasonal.std():.3f}")

# %%
# edges are padded with the first and last value
print(decompose(np.array([1.0, 2, 3, 4, 5]).reshape(1, -1, 1), 3).trend.data.ravel())
