"""Concentration-bound calculators: frozen values, scaling laws, coverage."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fqs
from fqs import (
    BoundInputs,
    ValidationError,
    build_sketch,
    communication_budget,
    dkw_bound,
    g2_error_scale,
    hp_quantile_bound,
    weight_bounds,
)

from .conftest import rng


def make_inputs(**kw):
    base = dict(
        n=6000, n_min=1000, n_group_min=1000, k=20, d=3, groups=2, delta=0.1
    )
    base.update(kw)
    return BoundInputs(**base)


# --------------------------------------------------------------- dkw_bound

def test_dkw_frozen_value():
    # sqrt(ln(40) / 10000), evaluated independently
    assert dkw_bound(5000, 0.05) == pytest.approx(0.019206, abs=1e-6)
    assert dkw_bound(5000, 0.05) == pytest.approx(
        math.sqrt(math.log(40.0) / 10000.0), abs=0
    )


def test_dkw_quadrupling_n_halves_bound():
    for n in (7, 100, 4096):
        assert dkw_bound(n, 0.2) / dkw_bound(4 * n, 0.2) == pytest.approx(
            2.0, abs=1e-12
        )


def test_dkw_inverts_its_own_tail():
    # delta = 2 exp(-2 n t^2) gives the bound back as t
    n, t = 800, 0.031
    delta = 2.0 * math.exp(-2.0 * n * t * t)
    assert dkw_bound(n, delta) == pytest.approx(t, rel=1e-12)


def test_dkw_rejects_bad_delta():
    for delta in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValidationError) as e:
            dkw_bound(100, delta)
        assert e.value.code == "delta-out-of-range"


@settings(max_examples=50)
@given(
    st.integers(1, 10**7),
    st.integers(1, 10**7),
    st.floats(0.001, 0.999),
    st.floats(0.001, 0.999),
)
def test_dkw_monotone(n1, n2, d1, d2):
    if n1 <= n2:
        assert dkw_bound(n1, d1) >= dkw_bound(n2, d1)
    if d1 <= d2:
        assert dkw_bound(n1, d1) >= dkw_bound(n1, d2)


# ------------------------------------------------------- hp_quantile_bound

def test_hp_frozen_value():
    # sqrt(ln(20400) / 2000): the union is over 2*(k+1)*d*groups events
    inp = make_inputs(n=5000, n_min=1000, k=50, d=5, groups=2, delta=0.05)
    assert hp_quantile_bound(inp) == pytest.approx(0.07044, abs=1e-4)
    assert hp_quantile_bound(inp) == pytest.approx(
        math.sqrt(math.log(20400.0) / 2000.0), abs=0
    )


def test_hp_doubling_m_eps_halves_bound():
    lo = hp_quantile_bound(make_inputs(m_eps=1.0))
    hi = hp_quantile_bound(make_inputs(m_eps=2.0))
    assert lo / hi == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=50)
@given(
    st.integers(1, 500),
    st.integers(1, 500),
    st.integers(1, 40),
    st.integers(1, 40),
    st.integers(2, 20),
    st.integers(2, 20),
    st.integers(100, 10**6),
    st.integers(100, 10**6),
    st.floats(0.001, 0.999),
    st.floats(0.001, 0.999),
)
def test_hp_monotone(k1, k2, d1, d2, s1, s2, n1, n2, del1, del2):
    def hp(k, d, groups, n_min, delta):
        return hp_quantile_bound(
            make_inputs(k=k, d=d, groups=groups, n_min=n_min, delta=delta)
        )

    base = hp(k1, d1, s1, n1, del1)
    if k1 <= k2:
        assert base <= hp(k2, d1, s1, n1, del1)
    if d1 <= d2:
        assert base <= hp(k1, d2, s1, n1, del1)
    if s1 <= s2:
        assert base <= hp(k1, d1, s2, n1, del1)
    if n1 <= n2:
        assert base >= hp(k1, d1, s1, n2, del1)
    if del1 <= del2:
        assert base >= hp(k1, d1, s1, n1, del2)


# ------------------------------------------------------------ weight_bounds

def test_weight_bounds_frozen_alpha():
    inp = make_inputs(n=10000, groups=2, delta=0.1)
    got = weight_bounds(inp)
    assert got["alpha_bound"] == pytest.approx(0.013582, abs=1e-6)
    assert got["alpha_bound"] == pytest.approx(
        math.sqrt(math.log(40.0) / 20000.0), abs=0
    )


def test_weight_bounds_formulas():
    inp = make_inputs(n=3000, n_group_min=400, d=7, groups=3, delta=0.2)
    got = weight_bounds(inp)
    assert got["alpha_bound"] == pytest.approx(
        math.sqrt(math.log(2 * 3 / 0.2) / (2 * 3000)), abs=0
    )
    assert got["pi_bound"] == pytest.approx(
        math.sqrt(math.log(2 * 7 * 3 / 0.2) / (2 * 400)), abs=0
    )


def test_weight_bounds_finite_as_delta_to_one():
    got = weight_bounds(make_inputs(delta=0.999999))
    assert 0.0 < got["alpha_bound"] < 1.0
    assert 0.0 < got["pi_bound"] < 1.0


@settings(max_examples=50)
@given(st.integers(100, 10**6), st.integers(1, 40), st.integers(2, 12),
       st.floats(0.001, 0.999))
def test_pi_bound_dominates_alpha_bound(n, d, groups, delta):
    # the group-conditional counts are at most the total, and the union is
    # over more events, so the pi bound can never be the smaller one
    got = weight_bounds(
        make_inputs(n=n, n_group_min=max(1, n // (2 * groups)), d=d,
                    groups=groups, delta=delta)
    )
    assert got["pi_bound"] >= got["alpha_bound"]


# ----------------------------------------------------- communication budget

def test_budget_examples():
    assert communication_budget(5, 10, 2) == 110
    assert communication_budget(1, 1, 2) == 4
    assert communication_budget(1, 1) == 4  # groups defaults to 2


def test_budget_doubles_with_d():
    for d, k, groups in ((1, 5, 2), (3, 64, 4), (10, 1000, 3)):
        assert communication_budget(2 * d, k, groups) == 2 * communication_budget(
            d, k, groups
        )


def test_budget_formula():
    assert communication_budget(7, 33, 5) == 7 * 5 * 34


# ----------------------------------------------------------- g2 error scale

def test_g2_error_scale_composition():
    inp = make_inputs()
    assert g2_error_scale(inp) == pytest.approx(
        1.0 / inp.k + hp_quantile_bound(inp), abs=0
    )
    assert g2_error_scale(inp, c_eps=2.5) == pytest.approx(
        2.5 * g2_error_scale(inp), rel=1e-15
    )


# --------------------------------------------------------------- validation

def test_inputs_reject_nonpositive():
    for field in ("n", "n_min", "n_group_min", "k", "d", "groups"):
        with pytest.raises(ValidationError):
            make_inputs(**{field: 0})


def test_inputs_reject_bad_delta_and_eps():
    with pytest.raises(ValidationError):
        make_inputs(delta=0.0)
    with pytest.raises(ValidationError):
        make_inputs(delta=1.0)
    with pytest.raises(ValidationError):
        make_inputs(eps=0.5)
    with pytest.raises(ValidationError):
        make_inputs(m_eps=0.0)


# ----------------------------------------------------------------- coverage

def test_dkw_empirical_coverage():
    # 1000 uniform samples of size 500: the sup gap between the empirical
    # and true CDF may exceed the bound in at most 5% of draws
    bound = dkw_bound(500, 0.05)
    gen = rng(401)
    i = np.arange(1, 501)
    violations = 0
    for _ in range(1000):
        x = np.sort(gen.random(500))
        gap = max(np.max(i / 500.0 - x), np.max(x - (i - 1) / 500.0))
        violations += gap > bound
    assert violations / 1000.0 <= 0.05


def test_hp_quantile_empirical_coverage():
    # three silos, two groups, 1000 uniforms per cell: the worst grid-level
    # quantile error across all cells stays under the bound in >= 90% of
    # 500 replications
    inp = make_inputs()
    bound = hp_quantile_bound(inp)
    grid = fqs.GridSpec(k=20, trim_epsilon=0.05)
    levels = grid.levels()
    gen = rng(411)
    violations = 0
    for _ in range(500):
        worst = 0.0
        for _cell in range(inp.d * inp.groups):
            sketch = build_sketch(gen.random(1000), grid)
            worst = max(worst, float(np.max(np.abs(sketch.values - levels))))
        violations += worst > bound
    assert violations / 500.0 <= 0.10
