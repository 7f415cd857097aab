import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigchange.causal import (
    VERTICAL,
    CausalKind,
    StripeId,
    curve_rng,
    future_null_directions,
    killing_character,
    null_curve_closed_form,
    null_curve_ode_check,
    null_slopes,
    sample_causal_direction,
    stripe_of,
    timelike_direction,
    trapping_experiment,
)
from sigchange.geometry import (
    ChartPoint,
    CrosscapQuadratic,
    FlatMinkowski,
    GeometryError,
    TangentVector,
    coordinate_time,
    inner,
    rotating_metric,
    rotating_unit_timelike,
)

G = rotating_metric(math.pi)
V = rotating_unit_timelike()


def test_slopes_examples():
    assert null_slopes(G, ChartPoint(0, 0)) == pytest.approx((-1.0, 1.0), abs=1e-15)
    assert null_slopes(FlatMinkowski(), ChartPoint(3, -2)) == (-1.0, 1.0)
    s = null_slopes(G, ChartPoint(0, 0.25))
    assert VERTICAL in s
    # g_tt = g_xx = 0 and g_tx = 1 there, so the other edge is horizontal
    assert [v for v in s if v != VERTICAL][0] == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-1, 1), st.floats(-0.24, 0.24))
def test_slopes_are_null(t, x):
    gtt, gtx, gxx = G.components(t, x)
    for s in null_slopes(G, ChartPoint(t, x)):
        # direction (dt, dx) = (s, 1)
        assert gtt * s * s + 2 * gtx * s + gxx == pytest.approx(0.0, abs=1e-9 * max(1.0, s * s))


def test_slopes_match_paper_root_formula():
    for x in np.linspace(-0.2, 0.2, 9):
        c, s = math.cos(2 * math.pi * x), math.sin(2 * math.pi * x)
        assert sorted(null_slopes(G, ChartPoint(0, x))) == pytest.approx(sorted([(-1 + s) / c, (1 + s) / c]), abs=1e-12)


def test_no_cone_off_lorentzian_region():
    with pytest.raises(GeometryError):
        null_slopes(CrosscapQuadratic(), ChartPoint(0, 0))


def test_null_curve_closed_form_values():
    assert null_curve_closed_form(1, 0.0) == 0.0
    assert null_curve_closed_form(1, 0.25) == pytest.approx(-math.log(2) / (2 * math.pi), abs=1e-15)
    assert null_curve_closed_form(2, 0.1, C=1.0) == pytest.approx(
        1.0 - math.log(math.cos(0.1 * math.pi) - math.sin(0.1 * math.pi)) / math.pi
    )
    with pytest.raises(ValueError):
        null_curve_closed_form(2, 0.25)
    with pytest.raises(ValueError):
        null_curve_closed_form(3, 0.1)


@pytest.mark.parametrize("branch", [1, 2])
def test_null_curve_ode(branch):
    assert null_curve_ode_check(branch) <= 1e-6


def test_killing_character_examples():
    assert killing_character(0.0) == (CausalKind.TIMELIKE, -1.0)
    kind, val = killing_character(0.25)
    assert kind is CausalKind.NULL and abs(val) <= 1e-12
    kind, val = killing_character(0.5)
    assert kind is CausalKind.SPACELIKE and val == pytest.approx(1.0)


def test_stripes():
    assert stripe_of(0.0) == StripeId(0)
    assert stripe_of(0.25) is None
    assert stripe_of(1.1) == StripeId(1)
    assert stripe_of(0.5) is None
    assert StripeId(-2).bounds == (-2.25, -1.75)


@given(st.floats(-1, 1), st.floats(-0.24, 0.24), st.integers(0, 2**32))
def test_sampled_timelike_is_future_and_inside_cone(t, x, seed):
    p = ChartPoint(t, x)
    v = sample_causal_direction(G, p, np.random.default_rng(seed), CausalKind.TIMELIKE, V)
    assert inner(G, v, v) < 0
    assert inner(G, v, V.at(p)) < 0
    # inside the stationary stripe the Killing energy is negative too
    assert inner(G, TangentVector(p, 1.0, 0.0), v) < 0


@given(st.floats(-1, 1), st.floats(-2, 2), st.integers(0, 2**32))
def test_sampled_null_is_null(t, x, seed):
    p = ChartPoint(t, x)
    v = sample_causal_direction(G, p, np.random.default_rng(seed), CausalKind.NULL, V)
    assert abs(inner(G, v, v)) <= 1e-12
    assert inner(G, v, V.at(p)) < 0


@given(st.floats(-1, 1), st.floats(-2, 2), st.integers(0, 2**32))
def test_sampled_spacelike_is_spacelike(t, x, seed):
    p = ChartPoint(t, x)
    v = sample_causal_direction(G, p, np.random.default_rng(seed), CausalKind.SPACELIKE, V)
    assert inner(G, v, v) > 0


def test_flat_timelike_sample():
    rng = np.random.default_rng(4)
    for _ in range(20):
        v = sample_causal_direction(FlatMinkowski(), ChartPoint(0, 0), rng, CausalKind.TIMELIKE, coordinate_time())
        assert v.vt > abs(v.vx)


def test_timelike_direction_spans_cone():
    p = ChartPoint(0.0, 0.1)
    n1, n2 = future_null_directions(G, p, V)
    for frac in (0.1, 0.5, 0.9):
        v = timelike_direction(G, p, frac)
        assert inner(G, v, v) < 0 and math.hypot(v.vt, v.vx) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        timelike_direction(G, p, 1.0)


def test_curve_streams_are_independent_of_order():
    a = curve_rng(7, 3).random(4)
    curve_rng(7, 2).random(10)
    assert np.array_equal(a, curve_rng(7, 3).random(4))
    assert not np.array_equal(a, curve_rng(7, 4).random(4))


def test_trapping_small_ensemble():
    rep = trapping_experiment(G, 0, n_curves=20, lam_max=2.0, seed=1)
    assert rep.n_escaped == 0 and rep.max_E < 0 and rep.max_killing_norm < 0
    js = rep.to_json()
    assert set(js) == {"k", "n_curves", "n_escaped", "max_excursion", "min_E", "max_E", "seed"}


def test_trapping_other_stripe():
    rep = trapping_experiment(G, 2, n_curves=10, lam_max=1.0, seed=2)
    assert rep.n_escaped == 0 and rep.max_excursion < 0.25


def test_spacelike_control_escapes():
    rep = trapping_experiment(G, 0, n_curves=10, lam_max=2.0, mix="polylines", seed=0, kind=CausalKind.SPACELIKE)
    assert rep.n_escaped > 0


def test_trapping_rejects_bad_arguments():
    with pytest.raises(ValueError):
        trapping_experiment(G, 0, n_curves=0)
    with pytest.raises(ValueError):
        trapping_experiment(G, 0, n_curves=2, mix="random")
