"""Quantile sketches and the step distributions they induce.

A sketch is the vector of lower empirical quantiles of a score sample,
read at the midpoint levels of a fixed grid.  Sketches are the only thing
a data holder ever ships: k floats plus a count.  Everything downstream
(mixtures, inversion, distances) operates on the step distribution that
places mass 1/k on each sketch value.

Conventions, fixed once and used everywhere:

* grid levels are ``u_l = eps + (l - 1/2) * (1 - 2*eps) / k`` for
  ``l = 1..k``; ``eps = 0`` gives the plain midpoint grid;
* the empirical quantile at level u of a sorted sample ``x_1 <= ... <= x_n``
  is ``x_ceil(u*n)`` (lower quantile, left-continuous in u);
* the generalized inverse of a step CDF at level u is the smallest knot
  whose cumulative mass reaches u, with cumulative-mass comparisons
  slackened by ``CUM_MASS_SLACK`` to absorb float accumulation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError
from .numerics import CUM_MASS_SLACK, neumaier_cumsum

__all__ = [
    "GridSpec",
    "QuantileSketch",
    "StepCdf",
    "empirical_quantile",
    "build_sketch",
    "sketch_to_step_cdf",
    "mix_step_cdfs",
    "invert_step_cdf",
    "mixture_quantiles_on_grid",
]

# Relative snap tolerance when deciding whether u*n already sits on an
# integer; absorbs the rounding of grid levels times sample sizes.
_INDEX_SNAP = 1e-12


def _as_float_array(values, code: str, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(code, f"{what} must be one-dimensional")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(code, f"{what} must be finite")
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: k midpoint levels, optionally trimmed to
    [trim_epsilon, 1 - trim_epsilon]."""

    k: int
    trim_epsilon: float = 0.0

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValidationError("invalid-grid", f"k must be a positive integer, got {self.k!r}")
        eps = self.trim_epsilon
        if not (isinstance(eps, (int, float, np.floating)) and math.isfinite(eps)):
            raise ValidationError("invalid-grid", "trim_epsilon must be a finite number")
        if not 0.0 <= eps < 0.5:
            raise ValidationError("invalid-grid", f"trim_epsilon must lie in [0, 0.5), got {eps}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "trim_epsilon", float(eps))

    def levels(self) -> np.ndarray:
        """The k levels, strictly increasing inside (0, 1)."""
        ell = np.arange(1, self.k + 1, dtype=np.float64)
        return self.trim_epsilon + (ell - 0.5) * (1.0 - 2.0 * self.trim_epsilon) / self.k


@dataclass(frozen=True, eq=False)
class QuantileSketch:
    """Nondecreasing quantile values on a grid, plus the sample count."""

    grid: GridSpec
    values: np.ndarray
    count: int

    def __post_init__(self):
        vals = _as_float_array(self.values, "invalid-sketch", "sketch values")
        if vals.size != self.grid.k:
            raise ValidationError(
                "invalid-sketch",
                f"expected {self.grid.k} values, got {vals.size}",
            )
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValidationError("invalid-sketch", "sketch values must be nondecreasing")
        if not isinstance(self.count, (int, np.integer)) or self.count < 0:
            raise ValidationError("invalid-sketch", f"count must be a nonnegative integer, got {self.count!r}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "count", int(self.count))


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Discrete distribution: strictly increasing knots with positive
    masses summing to one (within 1e-12)."""

    knots: np.ndarray
    masses: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        knots = _as_float_array(self.knots, "invalid-step-cdf", "knots")
        masses = _as_float_array(self.masses, "invalid-step-cdf", "masses")
        if knots.size == 0:
            raise ValidationError("invalid-step-cdf", "need at least one knot")
        if knots.size != masses.size:
            raise ValidationError("invalid-step-cdf", "knots and masses must have equal length")
        if knots.size > 1 and np.any(np.diff(knots) <= 0):
            raise ValidationError("invalid-step-cdf", "knots must be strictly increasing")
        if np.any(masses <= 0):
            raise ValidationError("invalid-step-cdf", "masses must be positive")
        cum = neumaier_cumsum(masses)
        if abs(cum[-1] - 1.0) > 1e-12:
            raise ValidationError("invalid-step-cdf", f"masses sum to {cum[-1]!r}, expected 1")
        knots = knots.copy()
        masses = masses.copy()
        knots.setflags(write=False)
        masses.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_cum", cum)

    def cdf_at(self, x) -> np.ndarray:
        """Right-continuous CDF evaluated at the given points."""
        idx = np.searchsorted(self.knots, np.asarray(x, dtype=np.float64), side="right")
        cum = np.concatenate(([0.0], self._cum))
        return cum[idx]


def empirical_quantile(samples: np.ndarray, u: float) -> float:
    """Lower empirical quantile of a sorted sample at level u in (0, 1).

    Returns ``samples[ceil(u * n) - 1]`` (0-based).  Products ``u * n``
    within a relative 1e-12 of an integer are snapped to that integer so
    grid levels reconstructed in floating point do not skip an index.
    """
    arr = _as_float_array(samples, "empty-sample", "samples")
    n = arr.size
    if n == 0:
        raise ValidationError("empty-sample", "need at least one sample")
    if n > 1 and np.any(np.diff(arr) < 0):
        raise ValidationError("unsorted-samples", "samples must be sorted ascending")
    if not (isinstance(u, (int, float, np.floating)) and math.isfinite(u)) or not 0.0 < u < 1.0:
        raise ValidationError("level-out-of-range", f"u must lie in (0, 1), got {u!r}")
    return float(arr[_quantile_indices(np.asarray([float(u)]), n)[0] - 1])


def _quantile_indices(levels: np.ndarray, n: int) -> np.ndarray:
    """1-based sample indices ceil(u * n) for each level, with integer snap."""
    t = levels * n
    r = np.rint(t)
    snapped = np.abs(t - r) <= _INDEX_SNAP * np.maximum(t, 1.0)
    idx = np.where(snapped, r, np.ceil(t)).astype(np.int64)
    return np.clip(idx, 1, n)


def build_sketch(samples, grid: GridSpec) -> QuantileSketch:
    """Sort a raw sample and read its lower quantiles at the grid levels."""
    arr = _as_float_array(samples, "non-finite-sample", "samples")
    if arr.size == 0:
        raise ValidationError("empty-sample", "need at least one sample")
    ordered = np.sort(arr)
    idx = _quantile_indices(grid.levels(), ordered.size)
    return QuantileSketch(grid=grid, values=ordered[idx - 1], count=ordered.size)


def sketch_to_step_cdf(sk: QuantileSketch) -> StepCdf:
    """Distribution placing mass 1/k on every sketch value (ties merge)."""
    uniq, counts = np.unique(sk.values, return_counts=True)
    # cumulative counts / k is exact per element; masses are the diffs
    cum_counts = np.cumsum(counts)
    cum = cum_counts.astype(np.float64) / sk.grid.k
    masses = np.diff(np.concatenate(([0.0], cum)))
    return StepCdf(knots=uniq, masses=masses)


def _check_weights(weights, nparts: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size != nparts:
        raise ValidationError("weights-not-normalized", "need one weight per part")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights-not-normalized", "weights must be finite")
    if np.any(w < 0):
        raise ValidationError("negative-weight", "weights must be nonnegative")
    total = float(np.sum(w))
    if abs(total - 1.0) > 1e-9:
        raise ValidationError("weights-not-normalized", f"weights sum to {total!r}, expected 1")
    return w


def mix_step_cdfs(parts: Sequence[StepCdf], weights) -> StepCdf:
    """Weighted mixture of step distributions.

    Zero-weight parts are dropped; coinciding knots merge by adding mass;
    masses are renormalized by their compensated total so the result
    satisfies the StepCdf contract exactly.
    """
    if len(parts) == 0:
        raise ValidationError("weights-not-normalized", "need at least one part")
    w = _check_weights(weights, len(parts))
    keep = [(p, float(wi)) for p, wi in zip(parts, w) if wi > 0.0]
    if not keep:
        raise ValidationError("weights-not-normalized", "all weights are zero")
    if len(keep) == 1 and keep[0][1] == 1.0:
        return keep[0][0]
    knots = np.concatenate([p.knots for p, _ in keep])
    masses = np.concatenate([p.masses * wi for p, wi in keep])
    order = np.argsort(knots, kind="stable")
    knots = knots[order]
    masses = masses[order]
    uniq, start = np.unique(knots, return_index=True)
    merged = np.add.reduceat(masses, start)
    total = neumaier_cumsum(merged)[-1]
    return StepCdf(knots=uniq, masses=merged / total)


def invert_step_cdf(cdf: StepCdf, u: float) -> float:
    """Smallest knot whose cumulative mass reaches u (left-continuous).

    The comparison allows ``CUM_MASS_SLACK`` of headroom: a cumulative mass
    within that slack below u still counts as reaching u.  Probing at a
    knot's exact cumulative mass therefore returns that knot, while probing
    1e-12 above it moves to the next knot.
    """
    if not (isinstance(u, (int, float, np.floating)) and math.isfinite(u)) or not 0.0 < u < 1.0:
        raise ValidationError("level-out-of-range", f"u must lie in (0, 1), got {u!r}")
    return float(cdf.knots[_invert_many(cdf, np.asarray([float(u)]))[0]])


def _invert_many(cdf: StepCdf, levels: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf._cum, levels - CUM_MASS_SLACK, side="left")
    return np.minimum(idx, cdf.knots.size - 1)


Part = Union[StepCdf, QuantileSketch]


def mixture_quantiles_on_grid(parts: Sequence[Part], weights, grid: GridSpec) -> np.ndarray:
    """Quantiles of a weighted mixture, read at the grid levels.

    Parts may be sketches (converted to their step distributions) or step
    CDFs.  With a single unit-weight sketch on the same grid this is the
    identity: the sketch values come back unchanged.
    """
    cdfs = [sketch_to_step_cdf(p) if isinstance(p, QuantileSketch) else p for p in parts]
    mixed = mix_step_cdfs(cdfs, weights)
    return mixed.knots[_invert_many(mixed, grid.levels())]
