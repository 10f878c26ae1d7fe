"""Synthetic experiment designs and CSV loading.

Two generators cover the simulation studies: a 5-feature linear model with
two-sided response trimming, and a 1-D nonlinear design where source and
target share the covariate-given-response law but differ in the response
marginal (the target-shift setting by construction).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

LINEAR_BETA = np.array([1.132, 2.465, 7.776, 0.0, 0.0])
NONLINEAR_SOURCE_SD = 2.0
NONLINEAR_TARGET_SD = 0.5
NA_TOKENS = {"", "NA", "?"}


@dataclass(frozen=True)
class Dataset:
    """Covariate matrix (n, p) plus response vector (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise DataError(
                f"inconsistent dataset shapes: x {self.x.shape}, y {self.y.shape}"
            )

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gen_linear(n: int, seed: int, trim: float = 0.05) -> Dataset:
    """Linear design: x ~ N(0, I_5), y = x @ beta + eps, then two-sided trim.

    floor(trim * n) rows are dropped from each response tail, so the output
    has exactly n - 2 * floor(trim * n) rows (row order preserved).
    """
    if n < 20:
        raise ValueError(f"n must be >= 20, got {n}")
    if not 0.0 <= trim < 0.5:
        raise ValueError(f"trim must lie in [0, 0.5), got {trim}")
    rng = _rng(seed)
    x = rng.standard_normal((n, LINEAR_BETA.size))
    y = x @ LINEAR_BETA + rng.standard_normal(n)
    k = math.floor(trim * n)
    if k > 0:
        order = np.argsort(y, kind="stable")
        keep = np.ones(n, dtype=bool)
        keep[order[:k]] = False
        keep[order[n - k :]] = False
        x, y = x[keep], y[keep]
    return Dataset(x=x, y=y)


def gen_nonlinear(
    n: int, mu_t: float, seed: int, m: int | None = None
) -> tuple[Dataset, Dataset]:
    """Nonlinear design: x = y + 3 tanh(y) + eps with eps ~ N(0, 1).

    Source responses are N(0, sd=2); target responses are N(mu_t, sd=0.5).
    Both domains use the same conditional noise law. The target responses
    are returned for evaluation only. m defaults to round(0.8 * n).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if m is None:
        m = round(0.8 * n)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng = _rng(seed)
    y_s = NONLINEAR_SOURCE_SD * rng.standard_normal(n)
    x_s = y_s + 3.0 * np.tanh(y_s) + rng.standard_normal(n)
    y_t = mu_t + NONLINEAR_TARGET_SD * rng.standard_normal(m)
    x_t = y_t + 3.0 * np.tanh(y_t) + rng.standard_normal(m)
    return Dataset(x=x_s[:, None], y=y_s), Dataset(x=x_t[:, None], y=y_t)


def nonlinear_oracle_weights(y, mu_t: float) -> np.ndarray:
    """True importance weight of the nonlinear design: the ratio of the
    target response density N(mu_t, sd=0.5) to the source N(0, sd=2)."""
    y = np.asarray(y, dtype=np.float64)
    return (
        _normal_pdf(y, mu_t, NONLINEAR_TARGET_SD) / _normal_pdf(y, 0.0, NONLINEAR_SOURCE_SD)
    )


def _normal_pdf(y: np.ndarray, mean: float, sd: float) -> np.ndarray:
    z = (y - mean) / sd
    return np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * sd)


@dataclass(frozen=True)
class LoadedCsv:
    """A loaded tabular dataset plus the count of rows dropped for missing values."""

    x: np.ndarray
    y: np.ndarray
    dropped_rows: int

    def dataset(self) -> Dataset:
        return Dataset(x=self.x, y=self.y)


def load_csv(
    path,
    response_column: str,
    feature_columns: list[str],
    log_response: bool = False,
) -> LoadedCsv:
    """Load a comma-separated file with a header row.

    Rows with a missing value ("", "NA", or "?") in any used column are
    dropped and counted. Lines starting with '#' are skipped. The response
    is log-transformed when requested (raising on nonpositive values).
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(rows)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        columns = [response_column, *feature_columns]
        try:
            idx = [header.index(c) for c in columns]
        except ValueError:
            missing = [c for c in columns if c not in header]
            raise DataError(f"{path} is missing columns: {missing}") from None

        kept: list[list[float]] = []
        dropped = 0
        for lineno, row in enumerate(rows, start=2):
            cells = [row[i].strip() if i < len(row) else "" for i in idx]
            if any(c in NA_TOKENS for c in cells):
                dropped += 1
                continue
            try:
                kept.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_number(c))
                raise DataError(
                    f"{path}:{lineno}: non-numeric value {bad!r}"
                ) from None
    if not kept:
        raise DataError(f"{path}: no usable rows after dropping missing values")
    data = np.asarray(kept, dtype=np.float64)
    y, x = data[:, 0], data[:, 1:]
    if log_response:
        if np.any(y <= 0.0):
            raise DataError(f"{path}: log transform requires positive responses")
        y = np.log(y)
    return LoadedCsv(x=x, y=y, dropped_rows=dropped)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
