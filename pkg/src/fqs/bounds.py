"""Finite-sample error budgets for sketch-based audits.

All four calculators are closed-form functions of the audit geometry
(sample sizes, grid size k, silo count d, group count) and a failure
probability delta.  They return the half-widths of two-sided confidence
statements; nothing here is estimated from data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = [
    "BoundInputs",
    "dkw_bound",
    "hp_quantile_bound",
    "weight_bounds",
    "communication_budget",
    "g2_error_scale",
]


def _check_delta(delta: float) -> float:
    if not (isinstance(delta, (int, float)) and 0.0 < delta < 1.0):
        raise ValidationError("delta-out-of-range", f"delta must lie in (0, 1), got {delta!r}")
    return float(delta)


def _check_pos_int(value, name: str) -> int:
    if not isinstance(value, (int,)) or isinstance(value, bool) or value < 1:
        raise ValidationError("invalid-bound-inputs", f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class BoundInputs:
    """Geometry of one audit, used by the half-width calculators.

    n          total number of individuals
    n_min      smallest per-(silo, group) cell size
    n_group_min smallest group total
    k          grid size
    d          number of silos
    groups     number of groups
    delta      overall failure probability
    m_eps      lower bound on the density over the trimmed score range
    eps        trim level of the quantile range the bound covers
    """

    n: int
    n_min: int
    n_group_min: int
    k: int
    d: int
    groups: int
    delta: float
    m_eps: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        _check_pos_int(self.n, "n")
        _check_pos_int(self.n_min, "n_min")
        _check_pos_int(self.n_group_min, "n_group_min")
        _check_pos_int(self.k, "k")
        _check_pos_int(self.d, "d")
        _check_pos_int(self.groups, "groups")
        _check_delta(self.delta)
        if not (isinstance(self.m_eps, (int, float)) and self.m_eps > 0):
            raise ValidationError("invalid-bound-inputs", "m_eps must be positive")
        if not (isinstance(self.eps, (int, float)) and 0.0 <= self.eps < 0.5):
            raise ValidationError("invalid-bound-inputs", "eps must lie in [0, 0.5)")


def dkw_bound(n: int, delta: float) -> float:
    """Two-sided uniform CDF half-width sqrt(log(2/delta) / (2n))."""
    n = _check_pos_int(n, "n")
    delta = _check_delta(delta)
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def hp_quantile_bound(inp: BoundInputs) -> float:
    """Uniform quantile half-width over all cells and trimmed grid levels.

    ``(1/m_eps) * sqrt(log(2 (k+1) d groups / delta) / (2 n_min))``: a
    union bound over the d*groups cells and k+1 levels, inverted through
    the density floor m_eps.
    """
    arg = 2.0 * (inp.k + 1) * inp.d * inp.groups / inp.delta
    return math.sqrt(math.log(arg) / (2.0 * inp.n_min)) / inp.m_eps


def weight_bounds(inp: BoundInputs) -> dict:
    """Half-widths for the estimated group and silo-share weights."""
    alpha = math.sqrt(math.log(2.0 * inp.groups / inp.delta) / (2.0 * inp.n))
    pi = math.sqrt(math.log(2.0 * inp.d * inp.groups / inp.delta) / (2.0 * inp.n_group_min))
    return {"alpha_bound": alpha, "pi_bound": pi}


def communication_budget(d: int, k: int, groups: int = 2) -> int:
    """Floats shipped in one round: d * groups * (k + 1)."""
    return _check_pos_int(d, "d") * _check_pos_int(groups, "groups") * (_check_pos_int(k, "k") + 1)


def g2_error_scale(inp: BoundInputs, c_eps: float = 1.0) -> float:
    """Non-rigorous scale of the order-2 audit error: c_eps * (1/k + quantile half-width).

    The multiplicative constant in front of the two ingredients is not
    computable from the inputs, so this combines them at a user-supplied
    multiplier (default 1).  Treat the result as a scale, not a bound.
    """
    if not (isinstance(c_eps, (int, float)) and c_eps > 0 and math.isfinite(c_eps)):
        raise ValidationError("invalid-bound-inputs", "c_eps must be positive and finite")
    return float(c_eps) * (1.0 / inp.k + hp_quantile_bound(inp))
