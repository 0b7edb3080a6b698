"""Sliding-window statistical features over per-path RSS streams.

Eight statistics are computed per path and window: mean, population
variance, max, min, range, median, mode (most frequent reading, ties to
the smallest value) and the fraction of samples strictly above the window
mean.  Feature rows are laid out as eight contiguous blocks of length
n_paths, in that block order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .simulate import RssTrace

__all__ = [
    "FEATURE_BLOCKS",
    "WindowingConfig",
    "FeatureMatrix",
    "extract_windows",
    "normalize",
    "column_bounds",
    "normalize_between",
]

FEATURE_BLOCKS = (
    "mean",
    "variance",
    "max",
    "min",
    "range",
    "median",
    "mode",
    "prob_above_mean",
)


@dataclass(frozen=True)
class WindowingConfig:
    """Window length and stride in samples; stride defaults to window_len."""

    window_len: int = 20
    stride: int | None = None

    def __post_init__(self) -> None:
        if self.window_len < 2:
            raise ValueError("window_len must be >= 2")
        if self.stride is None:
            object.__setattr__(self, "stride", self.window_len)
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass
class FeatureMatrix:
    """n windows x (8 * n_paths) feature values, optionally labelled."""

    values: np.ndarray
    normalized: bool = False
    labels: np.ndarray | None = None
    n_paths: int | None = None
    window_len: int | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature values must be a 2-D matrix")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != len(self.values):
                raise ValueError("labels length must match row count")
        if self.n_paths is not None and self.values.shape[1] != 8 * self.n_paths:
            raise ValueError(
                f"width {self.values.shape[1]} != 8 * n_paths = {8 * self.n_paths}"
            )

    @property
    def n_windows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _mode_smallest(window: np.ndarray) -> float:
    """Most frequent value; count ties break to the numerically smallest."""
    values, counts = np.unique(window, return_counts=True)
    return float(values[np.argmax(counts)])


def _majority_label(states: np.ndarray) -> int:
    """Majority state in a window; count ties break to the smallest id."""
    return int(np.argmax(np.bincount(states)))


def extract_windows(trace: RssTrace, cfg: WindowingConfig = WindowingConfig()) -> FeatureMatrix:
    """Slide windows over every path and stack the eight per-path statistics.

    One row per window position (stride-spaced); the row label is the
    majority true state inside the window.
    """
    length, n_paths = trace.rss.shape
    lwin = cfg.window_len
    if length < lwin:
        raise ValueError(f"trace has {length} samples per path, window needs {lwin}")

    # (n_windows, n_paths, window_len)
    windows = sliding_window_view(trace.rss, lwin, axis=0)[:: cfg.stride]
    mean = windows.mean(axis=2)
    variance = windows.var(axis=2)  # population variance (divide by L)
    wmax = windows.max(axis=2)
    wmin = windows.min(axis=2)
    wrange = wmax - wmin
    median = np.median(windows, axis=2)
    mode = np.apply_along_axis(_mode_smallest, 2, windows)
    prob_above = (windows > mean[:, :, None]).sum(axis=2) / lwin

    values = np.concatenate(
        [mean, variance, wmax, wmin, wrange, median, mode, prob_above], axis=1
    )
    state_windows = sliding_window_view(trace.states, lwin)[:: cfg.stride]
    labels = np.array([_majority_label(w) for w in state_windows], dtype=np.int64)
    return FeatureMatrix(
        values=values,
        normalized=False,
        labels=labels,
        n_paths=n_paths,
        window_len=lwin,
    )


def normalize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Min-max scale each row into [0, 1]; a constant row maps to all zeros."""
    if matrix.normalized:
        raise ValueError("matrix is already normalized")
    if matrix.n_windows == 0:
        raise ValueError("cannot normalize an empty matrix")
    lo = matrix.values.min(axis=1, keepdims=True)
    hi = matrix.values.max(axis=1, keepdims=True)
    span = hi - lo
    out = np.zeros_like(matrix.values)
    np.divide(matrix.values - lo, span, out=out, where=span > 0)
    return FeatureMatrix(
        values=out,
        normalized=True,
        labels=None if matrix.labels is None else matrix.labels.copy(),
        n_paths=matrix.n_paths,
        window_len=matrix.window_len,
    )


def column_bounds(matrix: FeatureMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (min, max) of a feature matrix, for cross-domain scaling."""
    if matrix.n_windows == 0:
        raise ValueError("cannot take bounds of an empty matrix")
    return matrix.values.min(axis=0), matrix.values.max(axis=0)


def normalize_between(
    matrix: FeatureMatrix, lo: np.ndarray, hi: np.ndarray
) -> FeatureMatrix:
    """Column-wise min-max scaling with externally supplied bounds.

    Values falling outside the bounds are clipped into [0, 1]; degenerate
    columns (hi == lo) map to zero.
    """
    if matrix.normalized:
        raise ValueError("matrix is already normalized")
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    span = hi - lo
    out = np.zeros_like(matrix.values)
    np.divide(matrix.values - lo, span, out=out, where=span > 0)
    np.clip(out, 0.0, 1.0, out=out)
    return FeatureMatrix(
        values=out,
        normalized=True,
        labels=None if matrix.labels is None else matrix.labels.copy(),
        n_paths=matrix.n_paths,
        window_len=matrix.window_len,
    )
