"""CSV ingestion, train-fitted standardization and stride-1 sliding windows."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import DataError

SPLIT_RATIOS = {"ett": (0.6, 0.2, 0.2), "standard": (0.7, 0.1, 0.2)}
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class RawSeries:
    timestamps: tuple[str, ...]
    values: np.ndarray  # [T, C]
    channels: tuple[str, ...]

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape != (len(self.timestamps), len(self.channels)):
            raise DataError(
                f"RawSeries: values {self.values.shape} do not match "
                f"{len(self.timestamps)} timestamps x {len(self.channels)} channels"
            )

    def __len__(self) -> int:
        return len(self.timestamps)


def _sort_key(stamp: str):
    try:
        return datetime.fromisoformat(stamp)
    except ValueError:
        return None


def load_csv(path) -> RawSeries:
    """Read an ETT-style CSV: a header, a date column, then numeric channels.

    Row numbers in error messages count data rows from 1 (the header is row 0).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise DataError(f"{path}: header needs a date column and at least one channel")
        try:
            [float(h) for h in header[1:]]
        except ValueError:
            pass
        else:
            raise DataError(f"{path}: missing header row (first row is numeric)")

        stamps, rows = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            try:
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                bad = next(c for c in row[1:] if not _is_float(c))
                raise DataError(f"{path}: row {row_no}: non-numeric cell {bad!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise DataError(f"{path}: row {row_no}: missing or non-finite value")
            stamps.append(row[0].strip())
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")

    keys = [_sort_key(s) for s in stamps]
    if any(k is None for k in keys):
        keys = stamps
    for i in range(1, len(keys)):
        if not keys[i] > keys[i - 1]:
            raise DataError(f"{path}: timestamps not strictly increasing at row {i + 1}")
    return RawSeries(tuple(stamps), np.asarray(rows, dtype=np.float64), tuple(header[1:]))


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def split_bounds(total: int, kind: str) -> dict[str, tuple[int, int]]:
    """Contiguous, non-overlapping row ranges for train/val/test."""
    if kind not in SPLIT_RATIOS:
        raise DataError(f"unknown split kind {kind!r}; expected one of {sorted(SPLIT_RATIOS)}")
    r_train, _, r_test = SPLIT_RATIOS[kind]
    n_train = int(round(total * r_train, 9))
    n_test = int(round(total * r_test, 9))
    n_val = total - n_train - n_test
    return {
        "train": (0, n_train),
        "val": (n_train, n_train + n_val),
        "test": (n_train + n_val, total),
    }


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, values: np.ndarray, min_std: float = 1e-8) -> "Scaler":
        return cls(values.mean(axis=0), np.maximum(values.std(axis=0), min_std))

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return values * self.std + self.mean


@dataclass(frozen=True)
class WindowedDataset:
    """Standardized series plus window bookkeeping; windows never cross splits."""

    values: np.ndarray  # standardized [T, C]
    bounds: dict[str, tuple[int, int]]
    scaler: Scaler
    seq_len: int
    pred_len: int
    channels: tuple[str, ...] = field(default=())
    timestamps: tuple[str, ...] = field(default=())

    def starts(self, split: str) -> np.ndarray:
        lo, hi = self.bounds[split]
        return np.arange(lo, hi - self.seq_len - self.pred_len + 1)

    def num_samples(self, split: str) -> int:
        return len(self.starts(split))

    def windows(self, split: str, idx=None) -> tuple[np.ndarray, np.ndarray]:
        """(inputs [n, L, C], targets [n, O, C]) for sample positions ``idx``."""
        starts = self.starts(split)
        if idx is not None:
            starts = starts[np.asarray(idx)]
        offs_in = starts[:, None] + np.arange(self.seq_len)
        offs_out = starts[:, None] + self.seq_len + np.arange(self.pred_len)
        return self.values[offs_in], self.values[offs_out]

    def batches(self, split: str, batch_size: int, order=None):
        n = self.num_samples(split)
        order = np.arange(n) if order is None else np.asarray(order)
        for lo in range(0, n, batch_size):
            yield self.windows(split, order[lo : lo + batch_size])

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]


def make_windows(rs: RawSeries | np.ndarray, seq_len: int, pred_len: int,
                 split_kind: str = "standard") -> WindowedDataset:
    values = rs.values if isinstance(rs, RawSeries) else np.asarray(rs, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    bounds = split_bounds(len(values), split_kind)
    for name, (lo, hi) in bounds.items():
        if hi - lo < seq_len + pred_len:
            raise DataError(
                f"{name} split has {hi - lo} rows; windows of L={seq_len} + O={pred_len} need "
                f"{seq_len + pred_len}"
            )
    lo, hi = bounds["train"]
    scaler = Scaler.fit(values[lo:hi])
    return WindowedDataset(
        values=scaler.transform(values),
        bounds=bounds,
        scaler=scaler,
        seq_len=seq_len,
        pred_len=pred_len,
        channels=tuple(rs.channels) if isinstance(rs, RawSeries) else tuple(f"c{i}" for i in range(values.shape[1])),
        timestamps=tuple(rs.timestamps) if isinstance(rs, RawSeries) else (),
    )
