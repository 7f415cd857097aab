import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sigchange.dynamics import (
    GeodesicStatus,
    christoffel_closed_rotating,
    christoffel_identity_audit,
    christoffel_numeric,
    integrate_geodesic,
    integrate_geodesics,
    scalar_curvature,
    scalar_curvature_riemann,
)
from sigchange.geometry import (
    ChartPoint,
    CrosscapQuadratic,
    FlatMinkowski,
    GeometryError,
    TangentVector,
    rotating_metric,
)
from sigchange.quotient import ManifoldSpec, Topology

G = rotating_metric(math.pi)
PLANE = ManifoldSpec()


def _sympy_christoffel():
    t, x = sp.symbols("t x")
    c, s = sp.cos(2 * sp.pi * x), sp.sin(2 * sp.pi * x)
    g = sp.Matrix([[-c, s], [s, c]])
    gi = g.inv()
    X = (t, x)
    out = {}
    for a in range(2):
        for b in range(2):
            for d in range(b, 2):
                expr = sum(gi[a, e] * (sp.diff(g[e, b], X[d]) + sp.diff(g[e, d], X[b]) - sp.diff(g[b, d], X[e])) for e in range(2)) / 2
                out[(a, b, d)] = sp.lambdify(x, sp.simplify(expr), "math")
    return out


SYM = _sympy_christoffel()


@pytest.mark.parametrize("x", np.linspace(-0.45, 0.95, 15))
def test_closed_forms_match_symbolic(x):
    c = christoffel_closed_rotating(math.pi, ChartPoint(0.0, float(x)))
    ref = [SYM[k](x) for k in ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 0, 0), (1, 0, 1), (1, 1, 1))]
    assert np.allclose(c.as_array(), ref, atol=1e-12)


def test_christoffel_examples():
    c = christoffel_numeric(G, ChartPoint(0.0, 0.0))
    assert c.t_tt == pytest.approx(0.0, abs=1e-8)
    assert c.t_xx == pytest.approx(-2 * math.pi, abs=1e-8)
    c = christoffel_numeric(G, ChartPoint(0.0, 0.125))
    assert c.t_tt == pytest.approx(-math.pi / 2, abs=1e-8)
    assert np.all(christoffel_numeric(FlatMinkowski(), ChartPoint(0.3, 0.4)).as_array() == 0.0)
    assert np.allclose(
        christoffel_closed_rotating(math.pi, ChartPoint(0, 0)).as_array(), [0, 0, -2 * math.pi, 0, 0, 0], atol=1e-15
    )


@given(st.floats(-2, 2))
def test_closed_forms_have_period_half(x):
    a = christoffel_closed_rotating(math.pi, ChartPoint(0.0, x)).as_array()
    b = christoffel_closed_rotating(math.pi, ChartPoint(0.0, x + 0.5)).as_array()
    assert np.max(np.abs(a - b)) <= 1e-12


def test_identity_audit_holds():
    audit = christoffel_identity_audit(G, [ChartPoint(0.0, float(x)) for x in np.linspace(0, 1, 20)])
    assert len(audit) == 3 and all(item["holds"] for item in audit)


def test_christoffel_rejects_degenerate_point():
    with pytest.raises(GeometryError):
        christoffel_numeric(CrosscapQuadratic(), ChartPoint(0.6, 0.8))


@pytest.mark.parametrize("x", np.linspace(0, 1, 11))
def test_curvature_two_oracles_agree(x):
    p = ChartPoint(0.0, float(x))
    R = scalar_curvature(G, p)
    assert R == pytest.approx(scalar_curvature_riemann(G, p), abs=1e-5)
    # closed form from the symbolic Gaussian curvature of this metric
    assert R == pytest.approx(4 * math.pi**2 * math.cos(2 * math.pi * x), abs=1e-5)


def test_curvature_examples():
    assert scalar_curvature(G, ChartPoint(0, 0)) == pytest.approx(4 * math.pi**2, abs=1e-5)
    assert scalar_curvature(G, ChartPoint(0, 0.25)) == pytest.approx(0.0, abs=1e-5)
    assert scalar_curvature(FlatMinkowski(), ChartPoint(0.2, 0.1)) == 0.0


def test_flat_geodesic_is_straight():
    tr = integrate_geodesic(FlatMinkowski(), PLANE, TangentVector(ChartPoint(0, 0), 1.0, 0.0), 2.0, 1e-2)
    assert tr.status is GeodesicStatus.COMPLETED
    assert np.allclose(tr.t, tr.lam, atol=1e-12) and np.all(tr.x == 0.0)
    assert np.all(tr.energy == -1.0) and np.all(tr.norm2 == -1.0)
    assert np.all(np.diff(tr.lam) > 0)


def test_static_geodesic_in_rotating_stripe_is_complete():
    tr = integrate_geodesic(G, PLANE, TangentVector(ChartPoint(0, 0), 1.0, 0.0), 10.0)
    assert tr.status is GeodesicStatus.COMPLETED and tr.lam[-1] == pytest.approx(10.0)
    assert tr.energy_drift <= 1e-8 and tr.norm_drift <= 1e-8


def test_stored_invariants_recompute():
    tr = integrate_geodesic(G, PLANE, TangentVector(ChartPoint(0.2, 0.05), 1.1, 0.3), 1.0)
    gtt, gtx, gxx = G.components(tr.t, tr.x)
    assert np.max(np.abs(gtt * tr.vt + gtx * tr.vx - tr.energy)) <= 1e-12
    assert np.max(np.abs(gtt * tr.vt**2 + 2 * gtx * tr.vt * tr.vx + gxx * tr.vx**2 - tr.norm2)) <= 1e-12


def test_moving_geodesic_stops_before_killing_horizon():
    # with E^2 > -g_tt the curve reaches g_tt = 0 at finite affine time, where v_t blows up
    tr = integrate_geodesic(G, PLANE, TangentVector(ChartPoint(0, 0), 1.0, 0.5), 10.0)
    assert tr.status is not GeodesicStatus.COMPLETED
    assert np.max(np.abs(tr.x)) < 0.25
    assert tr.energy_drift <= 1e-8 * max(1, abs(tr.energy[0]))
    assert tr.norm_drift <= 1e-8 * max(1, abs(tr.norm2[0]))


def test_crosscap_geodesic_hits_degeneracy():
    tr = integrate_geodesic(
        CrosscapQuadratic(), ManifoldSpec(Topology.RP2), TangentVector(ChartPoint(0.0, 0.9), 1.0, 0.0), 5.0
    )
    assert tr.status is GeodesicStatus.HIT_DEGENERACY


def test_degenerate_start_rejected():
    with pytest.raises(GeometryError):
        integrate_geodesic(CrosscapQuadratic(), PLANE, TangentVector(ChartPoint(0.6, 0.8), 1.0, 0.0), 1.0)


def test_window_exit():
    tr = integrate_geodesic(
        FlatMinkowski(), PLANE, TangentVector(ChartPoint(0, 0), 1.0, 0.0), 5.0, 1e-2, window=(-1, 1, -1, 1)
    )
    assert tr.status is GeodesicStatus.LEFT_WINDOW
    assert tr.t[-1] <= 1.0


def test_mobius_seam_events():
    man = ManifoldSpec(Topology.MOBIUS_INF)
    tr = integrate_geodesic(FlatMinkowski(), man, TangentVector(ChartPoint(0.0, 0.5), 0.1, 1.0), 3.0, 1e-3)
    assert tr.status is GeodesicStatus.COMPLETED
    assert [s for _, s in tr.seam_events] == ["x=0~x=1"] * 3
    assert [lam for lam, _ in tr.seam_events] == pytest.approx([0.5, 1.5, 2.5], abs=1.1e-3)
    assert np.all((tr.x >= 0) & (tr.x <= 1))
    # each crossing flips t and v_t
    assert tr.vt[-1] == pytest.approx(-0.1)


def test_batch_matches_single():
    inits = [TangentVector(ChartPoint(0.1 * i, 0.02 * i), 1.0, 0.1 * i) for i in range(4)]
    batch = integrate_geodesics(G, PLANE, inits, 0.5)
    for v, tr in zip(inits, batch):
        one = integrate_geodesic(G, PLANE, v, 0.5)
        assert np.array_equal(one.t, tr.t) and one.status is tr.status


def test_generic_metric_uses_numpy_path():
    from sigchange.geometry import CustomMetric
    from sigchange.expr import ScalarField

    custom = CustomMetric(ScalarField.parse("-cos(2*pi*x)"), ScalarField.parse("sin(2*pi*x)"), ScalarField.parse("cos(2*pi*x)"))
    v = TangentVector(ChartPoint(0.1, 0.05), 1.2, 0.2)
    a = integrate_geodesic(custom, PLANE, v, 0.3)
    b = integrate_geodesic(G, PLANE, v, 0.3)
    assert len(a) == len(b)
    assert np.max(np.abs(a.x - b.x)) <= 1e-10


def test_to_csv_header():
    tr = integrate_geodesic(FlatMinkowski(), PLANE, TangentVector(ChartPoint(0, 0), 1.0, 0.0), 0.01, 1e-2)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "lambda,t,x,vt,vx,E,norm2"
    assert len(lines) == 3


def test_bad_step_arguments():
    v = TangentVector(ChartPoint(0, 0), 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_geodesic(G, PLANE, v, 1.0, dlam=0.0)
    with pytest.raises(ValueError):
        integrate_geodesic(G, PLANE, v, -1.0)
