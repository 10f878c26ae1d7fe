"""Density-ratio estimate eta(x) = p_t(x) / p_s(x) - 1 at the source points.

This is the right-hand side of the importance-weight equation. Both
densities are KDEs; the denominator is clamped away from zero because the
ratio blows up where the source density vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .kernels import KernelSpec, as_matrix, kde_pdf

DEFAULT_FLOOR_SCALE = 1e-8


@dataclass(frozen=True)
class EtaEstimate:
    """Estimated density-ratio-minus-one values at the source covariates."""

    values: np.ndarray
    floor_used: float
    centered: bool = False


def estimate_eta(
    source_x,
    target_x,
    spec_s: KernelSpec,
    spec_t: KernelSpec,
    floor: float | None = None,
    center: bool = False,
) -> EtaEstimate:
    """Estimate eta(x_i) = p_t(x_i) / max(p_s(x_i), floor) - 1 at every source point.

    ``floor=None`` uses the default relative clamp
    ``DEFAULT_FLOOR_SCALE * max_i p_s(x_i)``; ``floor=0`` disables clamping
    and raises if any source density evaluates to zero. ``center=True``
    subtracts the empirical mean (the population mean of eta under the
    source distribution is zero; centering is off by default and recorded
    in the result).
    """
    xs = as_matrix(source_x, "source_x")
    xt = as_matrix(target_x, "target_x")
    if xs.shape[1] != xt.shape[1]:
        raise DataError(
            f"source and target dimension mismatch: {xs.shape[1]} vs {xt.shape[1]}"
        )
    if floor is not None and (not np.isfinite(floor) or floor < 0.0):
        raise ValueError(f"floor must be a nonnegative real, got {floor}")

    p_s = kde_pdf(xs, spec_s, xs)
    p_t = kde_pdf(xt, spec_t, xs)
    if floor is None:
        floor = DEFAULT_FLOOR_SCALE * float(p_s.max())
    if floor == 0.0 and np.any(p_s == 0.0):
        raise DataError(
            "source density evaluates to zero at a source point and floor=0; "
            "increase the bandwidth or use a positive floor"
        )
    values = p_t / np.maximum(p_s, floor) - 1.0
    if center:
        values = values - values.mean()
    return EtaEstimate(values=values, floor_used=float(floor), centered=center)
