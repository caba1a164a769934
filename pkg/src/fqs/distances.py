"""Grid distances, exact step-CDF distances, and barycenters.

Two metrics between one-dimensional distributions appear throughout:

* the transport distance of order p between two quantile vectors on a
  shared grid, computed as the p-mean of the level-wise gaps;
* the CDF distance of order p between two step distributions, computed by
  exact integration of |F - G|^p between consecutive knots of the union.

For p = 1 the two coincide on matching inputs.  Barycenters under the
transport metric are level-wise: the weighted mean for p = 2 and the lower
weighted median for p = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .numerics import neumaier_sum
from .sketch import GridSpec, QuantileSketch, StepCdf, _check_weights

__all__ = [
    "QuantileArray",
    "wasserstein_p_grid",
    "cramer_p_step",
    "barycenter_quantiles",
    "weighted_median",
]

_MEDIAN_SLACK = 1e-12


def _check_p(p) -> int:
    if p not in (1, 2):
        raise ValidationError("unsupported-p", f"p must be 1 or 2, got {p!r}")
    return int(p)


@dataclass(frozen=True, eq=False)
class QuantileArray:
    """Nondecreasing quantile values attached to a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != self.grid.k:
            raise ValidationError("invalid-sketch", f"expected {self.grid.k} values")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("invalid-sketch", "values must be finite")
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValidationError("invalid-sketch", "values must be nondecreasing")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def _values_and_grid(x):
    if isinstance(x, (QuantileArray, QuantileSketch)):
        return x.values, x.grid
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("invalid-sketch", "quantile values must be one-dimensional")
    return arr, None


def _aligned_values(a, b):
    va, ga = _values_and_grid(a)
    vb, gb = _values_and_grid(b)
    if ga is not None and gb is not None and ga != gb:
        raise ValidationError("grid-mismatch", f"grids differ: {ga} vs {gb}")
    if va.size != vb.size:
        raise ValidationError("grid-mismatch", f"lengths differ: {va.size} vs {vb.size}")
    return va, vb


def wasserstein_p_grid(a, b, p) -> float:
    """Order-p transport distance between quantile vectors on one grid.

    Returns ``(mean_l |a_l - b_l|^p)^(1/p)``; inputs may be QuantileArray,
    QuantileSketch, or plain aligned vectors.
    """
    p = _check_p(p)
    va, vb = _aligned_values(a, b)
    gaps = np.abs(va - vb)
    total = neumaier_sum(gaps if p == 1 else gaps * gaps)
    return float((total / va.size) ** (1.0 / p))


def cramer_integral(f: StepCdf, g: StepCdf, p) -> float:
    """Exact integral of |F - G|^p dx between two step distributions."""
    p = _check_p(p)
    cuts = np.union1d(f.knots, g.knots)
    if cuts.size < 2:
        return 0.0
    widths = np.diff(cuts)
    gaps = np.abs(f.cdf_at(cuts[:-1]) - g.cdf_at(cuts[:-1]))
    return float(neumaier_sum(widths * (gaps if p == 1 else gaps * gaps)))


def cramer_p_step(f: StepCdf, g: StepCdf, p) -> float:
    """Order-p CDF distance: the p-th root of :func:`cramer_integral`."""
    p = _check_p(p)
    return float(cramer_integral(f, g, p) ** (1.0 / p))


def _stack_rows(arrays) -> np.ndarray:
    rows = []
    size = None
    grid = None
    for a in arrays:
        v, g = _values_and_grid(a)
        if grid is not None and g is not None and grid != g:
            raise ValidationError("grid-mismatch", "arrays live on different grids")
        grid = grid or g
        if size is not None and v.size != size:
            raise ValidationError("grid-mismatch", "arrays have different lengths")
        size = v.size
        rows.append(v)
    if not rows:
        raise ValidationError("empty-sample", "need at least one quantile array")
    return np.vstack(rows)


def barycenter_quantiles(arrays: Sequence, weights, p) -> np.ndarray:
    """Level-wise barycenter of quantile vectors under the order-p metric.

    p = 2 gives the weighted mean at every level, p = 1 the lower weighted
    median.  Weights must be nonnegative and sum to one (within 1e-9).
    """
    p = _check_p(p)
    rows = _stack_rows(arrays)
    w = _check_weights(weights, rows.shape[0])
    if p == 2:
        out = np.zeros(rows.shape[1], dtype=np.float64)
        for i in range(rows.shape[0]):
            out += w[i] * rows[i]
        return out
    return _columnwise_weighted_median(rows, w)


def _columnwise_weighted_median(rows: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Lower weighted median down each column (smallest value whose
    cumulative normalized weight reaches 1/2)."""
    total = neumaier_sum(w)
    if total <= 0:
        raise ValidationError("weights-not-normalized", "weights must not all be zero")
    order = np.argsort(rows, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(rows, order, axis=0)
    sorted_w = w[order]
    cum = np.cumsum(sorted_w, axis=0)
    reached = cum >= (0.5 - _MEDIAN_SLACK) * total
    pick = np.argmax(reached, axis=0)
    return sorted_vals[pick, np.arange(rows.shape[1])]


def power_dispersion(rows: np.ndarray, weights, center: np.ndarray, p) -> float:
    """Weighted mean over rows of the level-mean p-th power gap to a center.

    This is the common accumulation behind the population disparity
    functionals: ``sum_s w_s * mean_l |rows[s, l] - center[l]|^p``.  Sums
    run in row order with compensated accumulation, so the result does not
    depend on threading or chunking.
    """
    p = _check_p(p)
    rows = np.asarray(rows, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if rows.ndim != 2 or center.shape != (rows.shape[1],):
        raise ValidationError("grid-mismatch", "rows and center must share one grid")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (rows.shape[0],):
        raise ValidationError("weights-not-normalized", "need one weight per row")
    k = rows.shape[1]
    per_row = np.empty(rows.shape[0], dtype=np.float64)
    for i in range(rows.shape[0]):
        gaps = np.abs(rows[i] - center)
        per_row[i] = w[i] * (neumaier_sum(gaps if p == 1 else gaps * gaps) / k)
    return float(neumaier_sum(per_row))


def weighted_median(values, weights) -> float:
    """Lower weighted median of scalars with positive total weight."""
    vals = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ValidationError("empty-sample", "need at least one value")
    if w.shape != vals.shape:
        raise ValidationError("grid-mismatch", "values and weights must have equal length")
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(w))):
        raise ValidationError("invalid-sketch", "values and weights must be finite")
    if np.any(w < 0):
        raise ValidationError("negative-weight", "weights must be nonnegative")
    return float(_columnwise_weighted_median(vals[:, None], w)[0])
