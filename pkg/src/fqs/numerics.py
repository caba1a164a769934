"""Small numeric helpers used throughout the package.

Cumulative masses and weighted sums are accumulated with Neumaier's
compensated summation so results do not depend on how the work is split
across threads or how long the input is.  All comparisons of a cumulative
mass against a probability level use ``CUM_MASS_SLACK``; the slack absorbs
the residual rounding of the compensated sums while staying strictly below
the 1e-12 step used by the left-continuity contract of the inverse CDF
(``invert_step_cdf(cdf, c + 1e-12)`` must land on the next knot).
"""

from __future__ import annotations

import numpy as np

CUM_MASS_SLACK = 5e-13


def neumaier_sum(values) -> float:
    """Compensated sum of a 1-D array, accumulated in index order."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=np.float64):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def neumaier_cumsum(values) -> np.ndarray:
    """Compensated running sums of a 1-D array (same length as input)."""
    arr = np.asarray(values, dtype=np.float64)
    out = np.empty(arr.shape, dtype=np.float64)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(arr):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out
