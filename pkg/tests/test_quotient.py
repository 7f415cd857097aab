import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigchange.geometry import (
    ChartPoint,
    CrosscapQuadratic,
    FlatMinkowski,
    TangentVector,
    coordinate_time,
    rotating_metric,
    rotating_unit_timelike,
)
from sigchange.quotient import (
    ManifoldSpec,
    OutsideDomainError,
    Topology,
    attach_psi,
    canonicalize,
    canonicalize_arrays,
    seam_compatibility,
    transport_vector,
    vector_field_seam_check,
)

R2 = math.sqrt(2.0)
MOB = ManifoldSpec(Topology.MOBIUS_INF)
CMP = ManifoldSpec(Topology.MOBIUS_COMPACT)
RP2 = ManifoldSpec(Topology.RP2)


def test_mobius_canonicalize_examples():
    p, J = canonicalize(MOB, ChartPoint(0.3, 1.7))
    assert (p.t, p.x) == pytest.approx((-0.3, 0.7), abs=1e-15)
    assert np.array_equal(J, np.diag([-1.0, 1.0]))
    p, J = canonicalize(MOB, ChartPoint(0.3, 0.7))
    assert (p.t, p.x) == (0.3, 0.7)
    assert np.array_equal(J, np.eye(2))


def test_compact_mobius_example():
    p, J = canonicalize(CMP, ChartPoint(0.3, 1.2))
    assert (p.t, p.x) == pytest.approx((0.7, 0.2), abs=1e-15)
    assert np.array_equal(J, np.diag([-1.0, 1.0]))


def test_compact_mobius_rejects_t_outside_strip():
    with pytest.raises(OutsideDomainError):
        canonicalize(CMP, ChartPoint(1.5, 0.5))


def test_transport_examples():
    v = transport_vector(MOB, TangentVector(ChartPoint(0.3, 1.7), 1.0, 0.0))
    assert (v.base.t, v.base.x, v.vt, v.vx) == pytest.approx((-0.3, 0.7, -1.0, 0.0), abs=1e-15)
    v = transport_vector(MOB, TangentVector(ChartPoint(0.3, 1.7), 0.0, 1.0))
    assert (v.vt, v.vx) == (0.0, 1.0)


def test_rp2_germ_transport():
    d = 1e-3
    v = transport_vector(RP2, TangentVector(ChartPoint(0.4, -R2 - d), 1.0, 0.0))
    assert (v.base.t, v.base.x) == pytest.approx((-0.4, R2 - d), abs=1e-14)
    assert (v.vt, v.vx) == (-1.0, 0.0)


def test_rp2_rejects_far_points():
    with pytest.raises(OutsideDomainError):
        canonicalize(RP2, ChartPoint(5.0, 0.0))


@pytest.mark.parametrize("topo", list(Topology))
def test_topology_round_trip(topo):
    assert ManifoldSpec.of(topo.value).topology is topo


def test_topology_type_names():
    assert ManifoldSpec.of("InfiniteMobius") == MOB
    assert ManifoldSpec.of("RP2Square") == RP2
    with pytest.raises(ValueError):
        ManifoldSpec.of("torus")


boxes = {
    Topology.PLANE: (-50, 50, -50, 50),
    Topology.MOBIUS_INF: (-5, 5, -40, 40),
    Topology.MOBIUS_COMPACT: (0, 1, -40, 40),
    Topology.RP2: (-1.9, 1.9, -1.9, 1.9),
}


@pytest.mark.parametrize("topo", list(Topology))
@given(st.floats(0, 1), st.floats(0, 1))
def test_canonicalize_is_idempotent(topo, u, w):
    tmin, tmax, xmin, xmax = boxes[topo]
    man = ManifoldSpec(topo)
    t = tmin + u * (tmax - tmin)
    x = xmin + w * (xmax - xmin)
    try:
        p, J = canonicalize(man, ChartPoint(t, x))
    except OutsideDomainError:
        return
    q, K = canonicalize(man, p)
    assert (q.t, q.x) == (p.t, p.x)
    assert np.array_equal(K, np.eye(2))
    assert abs(abs(np.linalg.det(J)) - 1.0) == 0.0
    tmin, tmax, xmin, xmax = man.bounds
    assert tmin <= p.t <= tmax and xmin <= p.x <= xmax


@pytest.mark.parametrize("topo", list(Topology))
def test_germs_invert(topo):
    rng = np.random.default_rng(3)
    for germ in ManifoldSpec(topo).germs:
        t = rng.uniform(-1, 1, 50)
        x = rng.uniform(-1, 1, 50)
        t2, x2 = germ.inverse(*germ.forward(t, x))
        assert np.max(np.abs(t2 - t)) <= 1e-12 and np.max(np.abs(x2 - x)) <= 1e-12
        assert abs(abs(np.linalg.det(germ.jacobian)) - 1.0) == 0.0


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    t = rng.uniform(-3, 3, 200)
    x = rng.uniform(-3, 3, 200)
    tc, xc, jt, jx, _, code = canonicalize_arrays(MOB, t, x)
    for i in range(0, 200, 17):
        p, J = canonicalize(MOB, ChartPoint(t[i], x[i]))
        assert (p.t, p.x) == (tc[i], xc[i])
        assert (J[0, 0], J[1, 1]) == (jt[i], jx[i])
    assert np.all(code == 0)


def test_plane_has_no_seams():
    assert seam_compatibility(ManifoldSpec(), rotating_metric(math.pi)) == []
    assert vector_field_seam_check(ManifoldSpec(), coordinate_time()) == []


def test_mobius_metric_seam_reports():
    g = rotating_metric(math.pi)
    (c0,) = seam_compatibility(MOB, g, 0)
    (c1,) = seam_compatibility(MOB, g, 1)
    assert c0.max_abs_mismatch <= 1e-9
    # d_x g_tx is 2 pi on the near edge and -2 pi after pulling back
    assert c1.max_abs_mismatch == pytest.approx(4 * math.pi, abs=1e-6)
    assert np.max(np.abs(c1.delta[:, 1])) == pytest.approx(4 * math.pi, abs=1e-6)
    assert np.max(np.abs(c1.delta[:, [0, 2]])) <= 1e-6


def test_mobius_vector_seams():
    (v,) = vector_field_seam_check(MOB, rotating_unit_timelike())
    assert v.max_abs_mismatch <= 1e-12
    (d,) = vector_field_seam_check(MOB, coordinate_time())
    assert d.max_abs_mismatch == pytest.approx(2.0, abs=1e-15)


def test_crosscap_square_seam_jump():
    reports = seam_compatibility(RP2, CrosscapQuadratic(), 0)
    xs = next(r for r in reports if r.seam.startswith("x="))
    assert np.max(np.abs(np.abs(xs.delta[:, 1]) - 2 * R2 * np.abs(xs.s))) <= 1e-9
    assert np.max(np.abs(xs.delta[:, [0, 2]])) <= 1e-12


def test_flat_metric_descends_to_mobius():
    for order in (0, 1):
        (r,) = seam_compatibility(MOB, FlatMinkowski(), order)
        assert r.max_abs_mismatch <= 1e-9


def test_seam_report_json_shape():
    (r,) = seam_compatibility(MOB, rotating_metric(math.pi), 0, n_samples=5)
    js = r.to_json()
    assert js["seam"] == "x=0~x=1" and js["order"] == 0
    assert len(js["samples"]) == 5 and set(js["samples"][0]) == {"s", "dgtt", "dgtx", "dgxx"}


def test_attach_psi_examples():
    assert attach_psi(0.0) == ChartPoint(1.0, 0.0)
    p = attach_psi(math.pi)
    assert (p.t, p.x) == pytest.approx((1.0, 1.0), abs=1e-15)
    p = attach_psi(1.5 * math.pi)
    assert (p.t, p.x) == pytest.approx((0.0, 0.5), abs=1e-15)
    with pytest.raises(ValueError):
        attach_psi(2 * math.pi)
