"""The verdict bundle behind ``sigchange verify``.

Every check records what was measured, the threshold it was held to and
where the reference value comes from. Checks marked ``required=False`` test
claims of the source material itself (seam smoothness, a closed-form
curvature, wording of a proposition) and are reported as findings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import causal, dynamics, prescription, quotient
from .config import RunConfig
from .expr import ScalarField
from .geometry import (
    ChartPoint,
    CrosscapQuadratic,
    CustomMetric,
    TangentVector,
    VectorField,
    coordinate_time,
    rotating_metric,
    rotating_unit_timelike,
)

R2 = math.sqrt(2.0)

F_POOL = (
    "t^2 + x^2",
    "(t/1.5)^2 + (x - 0.2)^2",
    "1 + 0.5*t - 0.3*sin(pi*x)",
    "exp(-t^2)*cos(x)",
    "0.5 + t*x",
)

ADMISSIBLE_F = ("t^2 + x^2", "(t/1.5)^2 + (x - 0.2)^2", "1 + 0.5*t - 0.3*sin(pi*x)")


@dataclass
class Check:
    check: str
    required: bool
    passed: bool
    measured: object
    threshold: object
    oracle: str

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "required": self.required,
            "passed": bool(self.passed),
            "measured": self.measured,
            "threshold": self.threshold,
            "oracle": self.oracle,
        }


def _le(name, measured, threshold, oracle, required=True):
    return Check(name, required, bool(measured <= threshold), float(measured), threshold, oracle)


def random_custom_metric(rng: np.random.Generator) -> tuple[CustomMetric, VectorField, ScalarField]:
    """A random Lorentzian-ish custom metric with matching V and f, all as expressions."""
    a, b, c, d, e, p, q = (float(v) for v in rng.uniform(-0.5, 0.5, 7))
    m = CustomMetric(
        ScalarField.parse(f"-(1 + {a!r}*x^2)"),
        ScalarField.parse(f"{b!r}*sin(t)"),
        ScalarField.parse(f"1 + {c!r}*t^2 + 0.1*cos(x)"),
    )
    V = VectorField.parse(f"1 + {d!r}*x", f"{e!r}*t")
    f = ScalarField.parse(f"{p!r}*t^2 + {q!r}*cos(x)")
    return m, V, f


# -- groups of checks -------------------------------------------------------


def _metric_checks(cfg: RunConfig) -> list[Check]:
    g = rotating_metric(math.pi)
    V = rotating_unit_timelike()
    T, X = np.meshgrid(np.linspace(-2, 2, 200), np.linspace(-2, 2, 200), indexing="ij")
    det_err = float(np.max(np.abs(g.det(T, X) + 1.0)))
    gtt, gtx, gxx = g.components(T, X)
    vt, vx = V(T, X)
    vv_err = float(np.max(np.abs(gtt * vt * vt + 2 * gtx * vt * vx + gxx * vx * vx + 1.0)))

    rng = np.random.default_rng(cfg.seed)
    t = rng.uniform(-2, 2, 10_000)
    x = rng.uniform(-2, 2, 10_000)
    worst = 0.0
    for src in F_POOL:
        f = ScalarField.parse(src)
        gt = prescription.transform_metric(g, V, f)
        worst = max(worst, float(np.max(np.abs(gt.det(t, x) - (f(t, x) - 1.0)))))
    lemma = 0.0
    crng = np.random.default_rng([cfg.seed, 1])
    for i in range(5):
        m, W, f = random_custom_metric(crng)
        lemma = max(lemma, prescription.det_identity_check(m, W, f, 2000, seed=cfg.seed + i))
    return [
        _le("det_rotating_is_minus_one", det_err, 1e-12, "PAPER"),
        _le("rotating_V_unit_timelike", vv_err, 1e-12, "PAPER"),
        _le("det_transformed_is_f_minus_1", worst, 1e-10, "PAPER"),
        _le("det_lemma_custom_metrics", lemma, 1e-9, "DERIVED: matrix determinant lemma"),
    ]


def _christoffel_checks() -> list[Check]:
    g = rotating_metric(math.pi)
    xs = np.linspace(0.0, 1.0, 50)
    diff = 0.0
    per = 0.0
    for x in xs:
        p = ChartPoint(0.3, float(x))
        closed = dynamics.christoffel_closed_rotating(math.pi, p).as_array()
        diff = max(diff, float(np.max(np.abs(dynamics.christoffel_numeric(g, p).as_array() - closed))))
        shifted = dynamics.christoffel_closed_rotating(math.pi, ChartPoint(0.3, float(x) + 0.5)).as_array()
        per = max(per, float(np.max(np.abs(shifted - closed))))
    out = [
        _le("christoffel_closed_vs_numeric", diff, 1e-4, "DERIVED: finite-difference Levi-Civita"),
        _le("christoffel_period_half", per, 1e-12, "PAPER"),
    ]
    for item in dynamics.christoffel_identity_audit(g, [ChartPoint(0.0, float(x)) for x in xs]):
        out.append(
            Check(
                f"christoffel_identity: {item['identity']}",
                False,
                item["holds"],
                item["max_residual"],
                1e-4,
                "PAPER (audited by finite differences)",
            )
        )
    return out


def _curvature_checks() -> list[Check]:
    g = rotating_metric(math.pi)
    xs = np.linspace(0.0, 1.0, 101)
    R = np.array([dynamics.scalar_curvature(g, ChartPoint(0.0, float(x))) for x in xs])
    R_riem = np.array([dynamics.scalar_curvature_riemann(g, ChartPoint(0.0, float(x))) for x in xs])
    cos1 = 4 * math.pi**2 * np.cos(2 * math.pi * xs)
    cos3 = 4 * math.pi**2 * np.cos(2 * math.pi * xs) ** 3
    stat = np.array([dynamics.scalar_curvature(g, ChartPoint(0.0, x)) for x in np.linspace(-0.2, 0.2, 21)])
    non = np.array([dynamics.scalar_curvature(g, ChartPoint(0.0, x)) for x in np.linspace(0.3, 0.7, 21)])
    margin = float(min(stat.min(), -non.max()))
    return [
        _le("curvature_brioschi_vs_riemann", float(np.max(np.abs(R - R_riem))), 1e-3, "DERIVED: Riemann tensor from Christoffels"),
        _le("curvature_vs_4pi2_cos", float(np.max(np.abs(R - cos1))), 1e-3, "DERIVED: symbolic curvature"),
        Check("curvature_sign_pattern", True, margin > 0, margin, 0.0, "PAPER"),
        _le("curvature_vs_4pi2_cos3", float(np.max(np.abs(R - cos3))), 1e-3, "PAPER", required=False),
    ]


def _null_curve_checks() -> list[Check]:
    return [
        _le("null_curve_branch1_rk4", causal.null_curve_ode_check(1), 1e-6, "PAPER"),
        _le("null_curve_branch2_rk4", causal.null_curve_ode_check(2), 1e-6, "PAPER"),
        _le("tangency_curve_rk4", prescription.tangency_ode_check(), 1e-6, "DERIVED: closed-form curve"),
    ]


def geodesic_starts(seed: int, n: int = 20) -> list[TangentVector]:
    """Random future timelike unit-speed starts in the stripe |x| < 1/4."""
    g = rotating_metric(math.pi)
    out = []
    for i in range(n):
        rng = causal.curve_rng(seed, 10_000 + i)
        p = ChartPoint(float(rng.uniform(-1, 1)), float(rng.uniform(-0.2, 0.2)))
        # stay off the cone edges, where unit normalisation blows the components up
        v = causal.timelike_direction(g, p, float(rng.uniform(0.1, 0.9)))
        gtt, gtx, gxx = g.components(p.t, p.x)
        n2 = gtt * v.vt**2 + 2 * gtx * v.vt * v.vx + gxx * v.vx**2
        s = 1.0 / math.sqrt(-n2)
        out.append(TangentVector(p, v.vt * s, v.vx * s))
    return out


def _geodesic_checks(cfg: RunConfig) -> list[Check]:
    g = rotating_metric(math.pi)
    traces = dynamics.integrate_geodesics(g, quotient.ManifoldSpec(), geodesic_starts(cfg.seed), cfg.lam_max, cfg.dlam)
    drift = max(
        max(tr.energy_drift / max(1.0, abs(tr.energy[0])), tr.norm_drift / max(1.0, abs(tr.norm2[0]))) for tr in traces
    )
    reached = min(float(tr.lam[-1]) for tr in traces)
    done = sum(tr.status is dynamics.GeodesicStatus.COMPLETED for tr in traces)
    return [
        _le("geodesic_conservation_on_integrated_segment", drift, 1e-8, "DERIVED: Killing energy and norm"),
        Check(
            "geodesic_reaches_lambda_max",
            False,
            done == len(traces),
            reached,
            cfg.lam_max,
            "SPEC: coverage of the affine interval",
        ),
    ]


def _trapping_checks(cfg: RunConfig):
    g = rotating_metric(math.pi)
    rep = causal.trapping_experiment(g, cfg.k, cfg.n_curves, cfg.lam_max, "both", cfg.seed, dlam=cfg.dlam)
    ctrl = causal.trapping_experiment(g, cfg.k, 20, 2.0, "polylines", cfg.seed, kind=causal.CausalKind.SPACELIKE)
    checks = [
        Check("trapping_no_escape", True, rep.n_escaped == 0, rep.n_escaped, 0, "PAPER"),
        Check("trapping_energy_negative", True, rep.max_E < 0, rep.max_E, 0.0, "PAPER"),
        Check("trapping_killing_timelike_on_samples", True, rep.max_killing_norm < 0, rep.max_killing_norm, 0.0, "PAPER"),
        Check("trapping_spacelike_control_escapes", True, ctrl.n_escaped > 0, ctrl.n_escaped, 1, "DERIVED: control"),
    ]
    return checks, {"trapping": rep.to_json(), "control": ctrl.to_json()}


def _radical_checks(cfg: RunConfig):
    m = CrosscapQuadratic()
    locus = prescription.degeneracy_locus(m, (-R2, R2, -R2, R2), 512)
    pts = prescription.locus_points(locus)
    circle = float(np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 1.0)))
    cls = prescription.radical_classification(m, locus, tol_tangent=cfg.tol_tangent, tol_grad=cfg.tol_grad)
    par = 0.0
    for r in cls.reports:
        d = np.hypot(r.point.t, r.point.x)
        par = max(par, abs(r.radical_dir.vt * (-r.point.x) - r.radical_dir.vx * r.point.t) / d)
    tp = cls.tangency_points
    tan_err = max((max(abs(abs(p.t) - 1 / R2), abs(abs(p.x) - 1 / R2)) for p in tp), default=math.inf)
    # span vector as displayed: (1, sqrt(1 - t^2)/t) at a locus point
    t0, x0 = 0.6, 0.8
    gtt, gtx, gxx = m.components(t0, x0)
    Gm = np.array([[gtt, gtx], [gtx, gxx]])
    shown = np.array([1.0, math.sqrt(1 - t0 * t0) / t0])
    shown_res = float(np.linalg.norm(Gm @ (shown / np.linalg.norm(shown))))
    det0 = float(m.det(0.0, 0.0))
    checks = [
        _le("crosscap_locus_is_unit_circle", circle, 1e-6, "PAPER"),
        _le("crosscap_radical_parallel_t_minus_x", par, 1e-8, "DERIVED: null space of the component matrix"),
        Check("crosscap_tangency_count", True, len(tp) == 4, len(tp), 4, "PAPER"),
        _le("crosscap_tangency_location", tan_err, 1e-9, "PAPER"),
        Check("crosscap_other_points_transverse", True, cls.n_tangent == 0, cls.n_tangent, 0, "PAPER"),
        _le("crosscap_displayed_radical_span", shown_res, 1e-8, "PAPER", required=False),
        Check(
            "crosscap_disk_signature_wording",
            False,
            det0 < 0,
            det0,
            "det < 0 (Lorentzian) at the disk centre",
            "PAPER",
        ),
    ]
    details = {"tangency_points": [[p.t, p.x] for p in tp]}
    return checks, details


def _prescription_checks(cfg: RunConfig) -> list[Check]:
    g = rotating_metric(math.pi)
    V = rotating_unit_timelike()
    f = ScalarField.parse("t^2 + x^2")
    gt = prescription.transform_metric(g, V, f)
    locus = prescription.degeneracy_locus(gt, (-2, 2, -2, 2), 512)
    cond = prescription.condition_checks(gt, f, V, locus, cfg.tol_grad)
    cls = prescription.radical_classification(gt, locus, tol_tangent=cfg.tol_tangent, tol_grad=cfg.tol_grad)
    a = np.array([[p.t, p.x] for p in cond.condition2_violations]).reshape(-1, 2)
    b = np.array([[p.t, p.x] for p in cls.tangency_points]).reshape(-1, 2)
    if len(a) and len(a) == len(b):
        match = float(max(np.min(np.linalg.norm(b - q, axis=1)) for q in a))
    else:
        match = math.inf
    worst_align = 1.0
    for src in ADMISSIBLE_F:
        fs = ScalarField.parse(src)
        gts = prescription.transform_metric(g, V, fs)
        loc = prescription.degeneracy_locus(gts, (-2, 2, -2, 2), 512)
        for r in prescription.radical_classification(gts, loc).reports:
            vt, vx = (float(c) for c in V(r.point.t, r.point.x))
            al = abs(r.radical_dir.vt * vt + r.radical_dir.vx * vx) / math.hypot(vt, vx)
            worst_align = min(worst_align, al)
    return [
        Check("condition1_holds", True, cond.condition1_holds, cond.min_grad, cfg.tol_grad, "PAPER"),
        _le("condition1_min_grad_is_2", abs(cond.min_grad - 2.0), 1e-6, "PAPER"),
        Check("condition2_fails", True, not cond.condition2_holds, len(cond.condition2_violations), ">0", "PAPER"),
        _le("condition2_violations_match_tangency", match, 1e-8, "DERIVED: independent radical scan"),
        _le("transformed_radical_is_V", 1.0 - worst_align, 1e-8, "DERIVED: g~(V, .) = (1 - f) V_flat"),
    ]


def _quotient_checks(cfg: RunConfig):
    rng = np.random.default_rng([cfg.seed, 12])
    worst = 0.0
    # raw sampling boxes (t range, x range) that stay within reach of one germ
    boxes = {
        quotient.Topology.PLANE: ((-3, 3), (-3, 3)),
        quotient.Topology.MOBIUS_INF: ((-3, 3), (-3, 3)),
        quotient.Topology.MOBIUS_COMPACT: ((0, 1), (-3, 3)),
        quotient.Topology.RP2: ((-1.9, 1.9), (-1.9, 1.9)),
    }
    for topo, (tr, xr) in boxes.items():
        man = quotient.ManifoldSpec(topo)
        t = rng.uniform(*tr, 10_000)
        x = rng.uniform(*xr, 10_000)
        t1, x1, _, _, _, code = quotient.canonicalize_arrays(man, t, x)
        ok = code == 0
        t2, x2, jt, jx, _, _ = quotient.canonicalize_arrays(man, t1[ok], x1[ok])
        worst = max(
            worst,
            float(np.max(np.abs(t2 - t1[ok]), initial=0.0)),
            float(np.max(np.abs(x2 - x1[ok]), initial=0.0)),
            float(np.max(np.abs(jt - 1.0), initial=0.0)),
            float(np.max(np.abs(jx - 1.0), initial=0.0)),
        )
    mob = quotient.ManifoldSpec(quotient.Topology.MOBIUS_INF)
    rp2 = quotient.ManifoldSpec(quotient.Topology.RP2)
    v_mis = max(r.max_abs_mismatch for r in quotient.vector_field_seam_check(mob, rotating_unit_timelike()))
    dt_mis = max(r.max_abs_mismatch for r in quotient.vector_field_seam_check(mob, coordinate_time()))
    rot = rotating_metric(math.pi)
    s0 = quotient.seam_compatibility(mob, rot, 0)
    s1 = quotient.seam_compatibility(mob, rot, 1)
    sc = quotient.seam_compatibility(rp2, CrosscapQuadratic(), 0)
    # the x-seam of the square: off-diagonal mismatch should be 2 sqrt(2) |t|
    xs = next(r for r in sc if r.seam.startswith("x="))
    jump_fit = float(np.max(np.abs(np.abs(xs.delta[:, 1]) - 2 * R2 * np.abs(xs.s))))
    checks = [
        _le("canonicalize_idempotent", worst, 0.0, "DERIVED: idempotence"),
        _le("mobius_V_descends", v_mis, 1e-12, "DERIVED: substitution at x = 1"),
        _le("mobius_dt_flips", abs(dt_mis - 2.0), 1e-12, "DERIVED: Jacobian flips d_t"),
        _le("seam_rotating_mobius_C0", s0[0].max_abs_mismatch, 1e-9, "DERIVED: pullback at x = 0", required=False),
        _le("seam_rotating_mobius_C1", s1[0].max_abs_mismatch, 1e-6, "PAPER (smooth quotient claimed)", required=False),
        _le("seam_crosscap_square_C0", max(r.max_abs_mismatch for r in sc), 1e-9, "PAPER (smooth quotient claimed)", required=False),
        _le("seam_crosscap_jump_is_2sqrt2_t", jump_fit, 1e-9, "DERIVED: germ pullback", required=False),
    ]
    details = {"seams": [r.to_json() for r in (*s0, *s1, *sc)]}
    return checks, details


def run_verify(cfg: RunConfig) -> dict:
    checks: list[Check] = []
    details: dict = {}
    checks += _metric_checks(cfg)
    checks += _christoffel_checks()
    checks += _curvature_checks()
    checks += _null_curve_checks()
    checks += _geodesic_checks(cfg)
    c, d = _trapping_checks(cfg)
    checks += c
    details.update(d)
    c, d = _radical_checks(cfg)
    checks += c
    details.update(d)
    checks += _prescription_checks(cfg)
    c, d = _quotient_checks(cfg)
    checks += c
    details.update(d)
    required_failed = [c.check for c in checks if c.required and not c.passed]
    findings = [c.check for c in checks if not c.required and not c.passed]
    return {
        "seed": cfg.seed,
        "checks": [c.to_json() for c in checks],
        "required_failed": required_failed,
        "report_only_findings": findings,
        "details": details,
    }
