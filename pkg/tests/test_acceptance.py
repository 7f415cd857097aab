"""The thirteen acceptance criteria, each at its stated size and tolerance.

Every criterion records one ``criterion N: PASS|FAIL ...`` line before
asserting; the lines are printed together at the end of the pytest run.
Run this file directly to get only the checklist.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from sigchange import causal, dynamics, prescription, quotient
from sigchange.expr import ScalarField
from sigchange.geometry import (
    ChartPoint,
    CrosscapQuadratic,
    TangentVector,
    coordinate_time,
    rotating_metric,
    rotating_unit_timelike,
)
from sigchange.verify import ADMISSIBLE_F, F_POOL, random_custom_metric

R2 = math.sqrt(2.0)
G = rotating_metric(math.pi)
V = rotating_unit_timelike()


# collected here and printed by the terminal-summary hook in conftest.py
CHECKLIST: dict[int, str] = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CHECKLIST[n] = line
    print(line)
    assert ok, line


def _grid():
    return np.meshgrid(np.linspace(-2, 2, 200), np.linspace(-2, 2, 200), indexing="ij")


def test_criterion_01_rotating_det():
    start = time.perf_counter()
    T, X = _grid()
    err = float(np.max(np.abs(G.det(T, X) + 1.0)))
    elapsed = time.perf_counter() - start
    report(1, err <= 1e-12 and elapsed < 1.0, f"max|det+1| = {err:.3g} (<= 1e-12), {elapsed:.3f} s (< 1 s)")


def test_criterion_02_V_unit_timelike():
    T, X = _grid()
    gtt, gtx, gxx = G.components(T, X)
    vt, vx = V(T, X)
    err = float(np.max(np.abs(gtt * vt * vt + 2 * gtx * vt * vx + gxx * vx * vx + 1.0)))
    report(2, err <= 1e-12, f"max|g(V,V)+1| = {err:.3g} (<= 1e-12)")


def test_criterion_03_transformed_det():
    rng = np.random.default_rng(3)
    t = rng.uniform(-2, 2, 10_000)
    x = rng.uniform(-2, 2, 10_000)
    pick = rng.integers(0, len(F_POOL), 10_000)
    err = 0.0
    for i, src in enumerate(F_POOL):
        f = ScalarField.parse(src)
        gt = prescription.transform_metric(G, V, f)
        sel = pick == i
        err = max(err, float(np.max(np.abs(gt.det(t[sel], x[sel]) - (f(t[sel], x[sel]) - 1.0)))))
    lemma = 0.0
    crng = np.random.default_rng(33)
    for i in range(10):
        m, W, f = random_custom_metric(crng)
        lemma = max(lemma, prescription.det_identity_check(m, W, f, 1000, seed=i))
    report(3, err <= 1e-10 and lemma <= 1e-9, f"det(g~)-(f-1) = {err:.3g} (<= 1e-10), lemma = {lemma:.3g} (<= 1e-9)")


def test_criterion_04_christoffel():
    xs = np.linspace(0.0, 1.0, 50)
    diff = per = 0.0
    for x in xs:
        p = ChartPoint(0.37, float(x))
        closed = dynamics.christoffel_closed_rotating(math.pi, p).as_array()
        diff = max(diff, float(np.max(np.abs(dynamics.christoffel_numeric(G, p, h=1e-5).as_array() - closed))))
        shifted = dynamics.christoffel_closed_rotating(math.pi, ChartPoint(0.37, float(x) + 0.5)).as_array()
        per = max(per, float(np.max(np.abs(shifted - closed))))
    audit = dynamics.christoffel_identity_audit(G, [ChartPoint(0.0, float(x)) for x in xs])
    broken = [a["identity"] for a in audit if not a["holds"]]
    report(
        4,
        diff <= 1e-4 and per <= 1e-12,
        f"closed vs numeric = {diff:.3g} (<= 1e-4), period-1/2 = {per:.3g} (<= 1e-12), "
        f"report-only identity failures: {broken or 'none'}",
    )


def test_criterion_05_scalar_curvature():
    xs = np.linspace(0.0, 1.0, 101)
    R = np.array([dynamics.scalar_curvature(G, ChartPoint(0.0, float(x))) for x in xs])
    target = 4 * math.pi**2 * np.cos(2 * math.pi * xs) ** 3
    diff = float(np.max(np.abs(R - target)))
    stat = [dynamics.scalar_curvature(G, ChartPoint(0.0, x)) for x in np.linspace(-0.2, 0.2, 21)]
    non = [dynamics.scalar_curvature(G, ChartPoint(0.0, x)) for x in np.linspace(0.3, 0.7, 21)]
    signs = min(stat) > 0 and max(non) < 0
    cos1 = float(np.max(np.abs(R - 4 * math.pi**2 * np.cos(2 * math.pi * xs))))
    report(
        5,
        diff <= 1e-3 and signs,
        f"|R - 4pi^2 cos^3(2pi x)| = {diff:.4g} (<= 1e-3), sign pattern {'ok' if signs else 'wrong'}; "
        f"for reference |R - 4pi^2 cos(2pi x)| = {cos1:.3g}",
    )


def test_criterion_06_null_curves():
    e1 = causal.null_curve_ode_check(1, 0.2, 2000)
    e2 = causal.null_curve_ode_check(2, 0.2, 2000)
    report(6, max(e1, e2) <= 1e-6, f"branch 1 = {e1:.3g}, branch 2 = {e2:.3g} (<= 1e-6)")


def stripe_starts(seed=2024, n=20):
    """Unit timelike future starts in M_0, at cone fractions in [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = ChartPoint(float(rng.uniform(-1, 1)), float(rng.uniform(-0.2, 0.2)))
        v = causal.timelike_direction(G, p, float(rng.uniform(0.1, 0.9)))
        gtt, gtx, gxx = G.components(p.t, p.x)
        s = 1.0 / math.sqrt(-(gtt * v.vt**2 + 2 * gtx * v.vt * v.vx + gxx * v.vx**2))
        out.append(TangentVector(p, v.vt * s, v.vx * s))
    return out


def _drift(traces):
    return max(max(tr.energy_drift / max(1.0, abs(tr.energy[0])), tr.norm_drift / max(1.0, abs(tr.norm2[0]))) for tr in traces)


def test_criterion_07_conservation():
    start = time.perf_counter()
    traces = dynamics.integrate_geodesics(G, quotient.ManifoldSpec(), stripe_starts(), 10.0, 1e-3)
    elapsed = time.perf_counter() - start
    reached = min(float(tr.lam[-1]) for tr in traces)
    drift = _drift(traces)
    ok = reached >= 10.0 - 1e-9 and drift <= 1e-8 and elapsed < 10.0
    report(
        7,
        ok,
        f"drift = {drift:.3g} (<= 1e-8) on the integrated part; smallest lambda reached = {reached:.3g} of 10 "
        f"({sum(tr.status is dynamics.GeodesicStatus.COMPLETED for tr in traces)}/20 complete), {elapsed:.2f} s",
    )


def test_criterion_08_trapping():
    rep = causal.trapping_experiment(G, 0, 200, 10.0, "both", seed=8)
    ctrl = causal.trapping_experiment(G, 0, 20, 2.0, "polylines", seed=8, kind=causal.CausalKind.SPACELIKE)
    ok = rep.n_escaped == 0 and rep.max_E < 0 and ctrl.n_escaped > 0
    report(
        8,
        ok,
        f"escapes = {rep.n_escaped}/200, max E = {rep.max_E:.3g} (< 0), "
        f"max excursion = {rep.max_excursion:.4f}, spacelike control escapes = {ctrl.n_escaped}/20",
    )


def test_criterion_09_crosscap_radical():
    m = CrosscapQuadratic()
    locus = prescription.degeneracy_locus(m, (-R2, R2, -R2, R2), 512)
    pts = prescription.locus_points(locus)
    circle = float(np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 1.0)))
    cls = prescription.radical_classification(m, locus)
    par = max(
        abs(r.radical_dir.vt * (-r.point.x) - r.radical_dir.vx * r.point.t) / math.hypot(r.point.t, r.point.x)
        for r in cls.reports
    )
    tp = cls.tangency_points
    loc = max((max(abs(abs(p.t) - 1 / R2), abs(abs(p.x) - 1 / R2)) for p in tp), default=math.inf)
    ok = circle <= 1e-6 and par <= 1e-8 and len(tp) == 4 and loc <= 1e-9 and cls.n_tangent == 0
    report(
        9,
        ok,
        f"radial dev = {circle:.3g} (<= 1e-6), radical residual = {par:.3g} (<= 1e-8), "
        f"{len(tp)} tangency points at {loc:.3g} (<= 1e-9), {len(cls.reports)} other vertices transverse",
    )


def test_criterion_10_conditions():
    f = ScalarField.parse("t^2 + x^2")
    gt = prescription.transform_metric(G, V, f)
    locus = prescription.degeneracy_locus(gt, (-2, 2, -2, 2), 512)
    cond = prescription.condition_checks(gt, f, V, locus)
    cls = prescription.radical_classification(gt, locus)
    a = np.array([[p.t, p.x] for p in cond.condition2_violations]).reshape(-1, 2)
    b = np.array([[p.t, p.x] for p in cls.tangency_points]).reshape(-1, 2)
    match = max((float(np.min(np.linalg.norm(b - q, axis=1))) for q in a), default=math.inf) if len(b) else math.inf
    ok = (
        cond.condition1_holds
        and abs(cond.min_grad - 2.0) <= 1e-6
        and not cond.condition2_holds
        and len(a) == len(b) > 0
        and match <= 1e-8
    )
    report(
        10,
        ok,
        f"min|grad f| = {cond.min_grad:.12g}, condition2 violations = {len(a)}, "
        f"tangency points = {len(b)}, max distance = {match:.3g} (<= 1e-8)",
    )


def test_criterion_11_radical_is_V():
    worst = 1.0
    counts = []
    for src in ADMISSIBLE_F:
        gt = prescription.transform_metric(G, V, src)
        reports = prescription.radical_classification(gt, prescription.degeneracy_locus(gt, (-2, 2, -2, 2), 512)).reports
        counts.append(len(reports))
        for r in reports:
            vt, vx = (float(c) for c in V(r.point.t, r.point.x))
            worst = min(worst, abs(r.radical_dir.vt * vt + r.radical_dir.vx * vx) / math.hypot(vt, vx))
    report(11, worst >= 1 - 1e-8 and min(counts) > 0, f"min alignment = 1 - {1 - worst:.3g} over {sum(counts)} H-points, 3 f")


def test_criterion_12_quotients():
    rng = np.random.default_rng(12)
    worst = 0.0
    boxes = {
        quotient.Topology.PLANE: ((-3, 3), (-3, 3)),
        quotient.Topology.MOBIUS_INF: ((-3, 3), (-3, 3)),
        quotient.Topology.MOBIUS_COMPACT: ((0, 1), (-3, 3)),
        quotient.Topology.RP2: ((-1.9, 1.9), (-1.9, 1.9)),
    }
    for topo, (tr, xr) in boxes.items():
        man = quotient.ManifoldSpec(topo)
        t, x = rng.uniform(*tr, 10_000), rng.uniform(*xr, 10_000)
        t1, x1, _, _, _, code = quotient.canonicalize_arrays(man, t, x)
        ok = code == 0
        t2, x2, jt, jx, _, _ = quotient.canonicalize_arrays(man, t1[ok], x1[ok])
        worst = max(worst, float(np.max(np.abs(t2 - t1[ok]))), float(np.max(np.abs(x2 - x1[ok]))))
        worst = max(worst, float(np.max(np.abs(jt - 1))), float(np.max(np.abs(jx - 1))))
    mob = quotient.ManifoldSpec(quotient.Topology.MOBIUS_INF)
    v_mis = max(r.max_abs_mismatch for r in quotient.vector_field_seam_check(mob, V))
    dt_mis = max(r.max_abs_mismatch for r in quotient.vector_field_seam_check(mob, coordinate_time()))
    c0 = quotient.seam_compatibility(mob, G, 0)[0].max_abs_mismatch
    c1 = quotient.seam_compatibility(mob, G, 1)[0].max_abs_mismatch
    sq = quotient.seam_compatibility(quotient.ManifoldSpec(quotient.Topology.RP2), CrosscapQuadratic(), 0)
    xs = next(r for r in sq if r.seam.startswith("x="))
    jump = float(np.max(np.abs(np.abs(xs.delta[:, 1]) - 2 * R2 * np.abs(xs.s))))
    ok = (
        worst == 0.0
        and v_mis <= 1e-12
        and abs(dt_mis - 2.0) <= 1e-12
        and c0 <= 1e-9
        and abs(c1 - 4 * math.pi) <= 1e-6
        and jump <= 1e-9
    )
    report(
        12,
        ok,
        f"idempotence = {worst:.3g}, V seam = {v_mis:.3g}, d_t seam = {dt_mis:.3g}; report-only: "
        f"Mobius C0 = {c0:.3g}, C1 = {c1:.6g} (4pi), square jump fit = {jump:.3g}",
    )


def _verify_bytes(tmp_path, name):
    out = tmp_path / name
    r = subprocess.run(
        [sys.executable, "-m", "sigchange.cli", "verify", "--seed", "13", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    return r.returncode, out.read_bytes()


def test_criterion_13_determinism(tmp_path):
    code_a, a = _verify_bytes(tmp_path, "a.json")
    code_b, b = _verify_bytes(tmp_path, "b.json")
    report(13, a == b and len(a) > 0, f"two verify runs, seed 13: {len(a)} bytes each, identical = {a == b}, exit {code_a}/{code_b}")


# -- supplementary to criterion 7 -------------------------------------------


def test_conservation_before_any_guard_acts():
    """Drift with the step guard opened up to 1e-1, on the part every curve covers."""
    traces = dynamics.integrate_geodesics(G, quotient.ManifoldSpec(), stripe_starts(), 10.0, 1e-3, norm_guard=1e-1)
    lam_common = min(float(tr.lam[-1]) for tr in traces)
    window = min(0.1, lam_common)
    drift = 0.0
    for tr in traces:
        sel = tr.lam <= window
        drift = max(
            drift,
            float(np.max(np.abs(tr.energy[sel] - tr.energy[0]))) / max(1.0, abs(tr.energy[0])),
            float(np.max(np.abs(tr.norm2[sel] - tr.norm2[0]))) / max(1.0, abs(tr.norm2[0])),
        )
    assert window == 0.1
    assert drift <= 1e-8


def test_static_geodesic_covers_full_interval():
    tr = dynamics.integrate_geodesic(G, quotient.ManifoldSpec(), TangentVector(ChartPoint(0.3, 0.0), 1.0, 0.0), 10.0)
    assert tr.status is dynamics.GeodesicStatus.COMPLETED
    assert max(tr.energy_drift, tr.norm_drift) <= 1e-8


def test_moving_geodesics_run_into_the_killing_horizon():
    """v_x^2 = E^2 - cos(2 pi x): every non-static curve reaches |x| = 1/4 at finite lambda, where v_t diverges."""
    traces = dynamics.integrate_geodesics(G, quotient.ManifoldSpec(), stripe_starts(), 10.0, 1e-3, norm_guard=1e-1)
    for tr in traces:
        assert tr.status is not dynamics.GeodesicStatus.COMPLETED
        assert np.max(np.abs(tr.x)) > 0.2
        assert abs(tr.vt[-1]) > 10 * abs(tr.vt[0])
        sel = tr.lam <= 0.1
        c = np.cos(2 * np.pi * tr.x[sel])
        assert np.allclose(tr.vx[sel] ** 2, tr.energy[0] ** 2 - c, rtol=0, atol=1e-8 * max(1.0, tr.energy[0] ** 2))


def test_default_verify_has_no_required_failures():
    from sigchange.config import RunConfig
    from sigchange.verify import run_verify

    result = run_verify(RunConfig())
    assert result["required_failed"] == []
    assert len(result["details"]["tangency_points"]) == 4
    c1 = next(c for c in result["checks"] if c["check"] == "seam_rotating_mobius_C1")
    assert c1["required"] is False and c1["measured"] == pytest.approx(12.566, abs=1e-3)


if __name__ == "__main__":
    import inspect
    import pathlib
    import tempfile

    for name, fn in sorted(inspect.getmembers(sys.modules[__name__], inspect.isfunction)):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in inspect.signature(fn).parameters:
                    with tempfile.TemporaryDirectory() as d:
                        fn(pathlib.Path(d))
                else:
                    fn()
            except AssertionError:
                pass
