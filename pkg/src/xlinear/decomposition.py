"""Moving-average trend/seasonal split of [B, L, C] series."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import Tensor, as_tensor, matmul, pad, sub

DEFAULT_KERNEL = 25


@dataclass(frozen=True)
class DecompPair:
    trend: Tensor
    seasonal: Tensor
    kernel: int


@lru_cache(maxsize=None)
def _window_matrix(length: int, k: int) -> np.ndarray:
    # row t averages padded rows t .. t+k-1
    m = np.zeros((length, length + k - 1))
    for t in range(length):
        m[t, t : t + k] = 1.0 / k
    m.setflags(write=False)
    return m


def moving_average(x, k: int) -> Tensor:
    """Centered k-point mean over the time axis with edge-replicated padding."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise ShapeError(f"moving_average: expected [B, L, C], got shape {x.shape}")
    length = x.shape[1]
    if k % 2 == 0:
        raise ConfigError(f"decompose: kernel size must be odd, got {k}")
    if not 1 <= k <= 2 * length - 1:
        raise ConfigError(f"decompose: kernel size {k} outside [1, {2 * length - 1}] for L={length}")
    half = (k - 1) // 2
    padded = pad(x, axis=1, before=half, after=half, mode="edge")
    return matmul(Tensor(_window_matrix(length, k)), padded)


def decompose(x, k: int = DEFAULT_KERNEL) -> DecompPair:
    """Split ``x`` into a moving-average trend and the residual seasonal part."""
    x = as_tensor(x)
    trend = moving_average(x, k)
    return DecompPair(trend=trend, seasonal=sub(x, trend), kernel=k)
