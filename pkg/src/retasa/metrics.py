"""Evaluation metrics and replication summaries."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


def weight_mse(estimated, oracle) -> float:
    """Mean squared difference between estimated and ground-truth weights."""
    return _mse(estimated, oracle, "weights")


def prediction_mse(predictions, truth) -> float:
    """Mean squared prediction error."""
    return _mse(predictions, truth, "predictions")


def _mse(a, b, what: str) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"{what} length mismatch: {a.shape[0]} vs {b.shape[0]}")
    d = a - b
    return float(d @ d) / a.shape[0]


def delta_accuracy(adapted_mse: float, nonadapted_mse: float) -> float:
    """Percent reduction in prediction MSE relative to the non-adapted model."""
    if nonadapted_mse <= 0.0:
        raise ValueError(f"baseline MSE must be positive, got {nonadapted_mse}")
    return 100.0 * (nonadapted_mse - adapted_mse) / nonadapted_mse


class TrimmedSummary(NamedTuple):
    mean: float
    sd: float


def trimmed_summary(values, trim_fraction: float) -> TrimmedSummary:
    """Mean and sample sd after dropping floor(trim * k) values from each tail.

    The sd uses the (k - 1) denominator and is NaN when a single value
    survives the trim.
    """
    if not 0.0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    k = math.floor(trim_fraction * v.size)
    v = v[k : v.size - k]
    if v.size == 0:
        raise ValueError("no values survive the trim")
    sd = float(np.std(v, ddof=1)) if v.size > 1 else math.nan
    return TrimmedSummary(mean=float(v.mean()), sd=sd)
