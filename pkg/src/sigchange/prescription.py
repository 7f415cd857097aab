"""Metric transformation g~ = g + f V_flat (x) V_flat, its degeneracy locus and radical.

The degeneracy locus H is where det(g~) vanishes. On H the component matrix
has a one-dimensional null space, the radical; whether the radical is
transverse to H or tangent to it decides what kind of signature change
happens there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from ._contour import Polyline, extract_zero_set
from .expr import ScalarField
from .geometry import (
    TOL_DEG,
    ChartPoint,
    GeometryError,
    MetricSpec,
    TangentVector,
    TransformedMetric,
    VectorField,
)

__all__ = [
    "TOL_TANGENT",
    "TOL_GRAD",
    "RadicalClass",
    "RadicalReport",
    "Classification",
    "ConditionReport",
    "DefiningFunction",
    "transform_metric",
    "det_identity_check",
    "degeneracy_locus",
    "radical_at",
    "radical_classification",
    "condition_checks",
    "tangency_locus_curve",
    "tangency_ode_check",
]

TOL_TANGENT = 1e-6
TOL_GRAD = 1e-8
ROOT_TOL = 1e-13


class RadicalClass(str, Enum):
    TRANSVERSE = "Transverse"
    TANGENT = "Tangent"


def transform_metric(g: MetricSpec, V: VectorField, f: ScalarField | str) -> TransformedMetric:
    if isinstance(f, str):
        f = ScalarField.parse(f)
    return TransformedMetric(g, f, V)


def det_identity_check(
    g: MetricSpec,
    V: VectorField,
    f: ScalarField,
    n: int,
    window=(-2.0, 2.0, -2.0, 2.0),
    seed: int = 0,
) -> float:
    """max |det(g~) - det(g) (1 + f g(V, V))| over n random points."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    t = rng.uniform(window[0], window[1], n)
    x = rng.uniform(window[2], window[3], n)
    gt = transform_metric(g, V, f)
    det_t = gt.det(t, x)
    gtt, gtx, gxx = g.components(t, x)
    vt, vx = V(t, x)
    vv = gtt * vt * vt + 2.0 * gtx * vt * vx + gxx * vx * vx
    expected = (gtt * gxx - gtx * gtx) * (1.0 + f(t, x) * vv)
    return float(np.max(np.abs(det_t - expected)))


def degeneracy_locus(m: MetricSpec, window, grid_n: int = 512) -> list[Polyline]:
    """Polylines of {det = 0}; vertices are bisected roots on grid edges."""
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    return extract_zero_set(m.det, window, grid_n)


def _orient(v: np.ndarray) -> np.ndarray:
    """First component that is not negligible made positive."""
    for c in v:
        if abs(c) > 1e-12:
            return v if c > 0 else -v
    return v


def _null_direction(G: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(G)
    return vh[-1]


def radical_at(m: MetricSpec, p: ChartPoint, tol_deg: float = TOL_DEG) -> TangentVector:
    """Unit null direction of the component matrix at a degenerate point."""
    gtt, gtx, gxx = (float(c) for c in m.components(p.t, p.x))
    det = gtt * gxx - gtx * gtx
    if abs(det) > tol_deg:
        raise GeometryError(f"metric is not degenerate at {p} (det = {det:.3e})")
    if max(abs(gtt), abs(gtx), abs(gxx)) <= tol_deg:
        raise GeometryError(f"metric vanishes at {p}; the radical is not one-dimensional")
    d = _orient(_null_direction(np.array([[gtt, gtx], [gtx, gxx]])))
    return TangentVector(p, float(d[0]), float(d[1]))


@dataclass(frozen=True)
class DefiningFunction:
    """A function h with H = {h = 0}, plus its gradient."""

    value: Callable
    gradient: Callable
    name: str = "h"

    @classmethod
    def for_metric(cls, m: MetricSpec) -> "DefiningFunction":
        if isinstance(m, TransformedMetric):
            f = m.f
            return cls(lambda t, x: f(t, x) - 1.0, lambda t, x: (f.grad[0](t, x), f.grad[1](t, x)), "f-1")
        return cls(m.det, m.det_gradient, "det")

    @classmethod
    def from_field(cls, h: ScalarField) -> "DefiningFunction":
        return cls(h, lambda t, x: (h.grad[0](t, x), h.grad[1](t, x)), str(h))


def _as_defining(m, h) -> DefiningFunction:
    if h is None:
        return DefiningFunction.for_metric(m)
    if isinstance(h, DefiningFunction):
        return h
    if isinstance(h, str):
        h = ScalarField.parse(h)
    return DefiningFunction.from_field(h)


def _project(hdef: DefiningFunction, q: np.ndarray, iters: int = 8) -> np.ndarray:
    """Newton steps along the gradient back onto h = 0."""
    q = np.array(q, dtype=float)
    for _ in range(iters):
        val = float(hdef.value(q[0], q[1]))
        if abs(val) < 1e-15:
            break
        gt, gx = (float(c) for c in hdef.gradient(q[0], q[1]))
        n2 = gt * gt + gx * gx
        if n2 == 0.0:
            break
        q = q - val * np.array([gt, gx]) / n2
    return q


def _bisect_segment(a, b, sigma, hdef, tol):
    """Root of sigma(projected point) for u in [0, 1] on the chord a -> b."""
    length = float(np.linalg.norm(b - a))
    lo, hi = 0.0, 1.0
    s_lo = sigma(_project(hdef, a))
    while (hi - lo) * length > tol:
        mid = 0.5 * (lo + hi)
        s_mid = sigma(_project(hdef, a + mid * (b - a)))
        if s_mid == 0.0:
            lo = hi = mid
            break
        if (s_mid > 0) == (s_lo > 0):
            lo, s_lo = mid, s_mid
        else:
            hi = mid
    return _project(hdef, a + 0.5 * (lo + hi) * (b - a))


def _dedupe(points: list[np.ndarray], tol: float = 1e-9) -> list[ChartPoint]:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in out):
            out.append(p)
    return [ChartPoint(float(p[0]), float(p[1])) for p in out]


def _polylines(locus) -> list[Polyline]:
    if isinstance(locus, Polyline):
        return [locus]
    return list(locus)


@dataclass
class RadicalReport:
    point: ChartPoint
    radical_dir: TangentVector
    h_tangent_dir: TangentVector
    classification: RadicalClass
    alignment: float
    s: float = 0.0  # arclength along the polyline

    def csv_row(self) -> list:
        return [
            self.s,
            self.point.t,
            self.point.x,
            self.radical_dir.vt,
            self.radical_dir.vx,
            self.h_tangent_dir.vt,
            self.h_tangent_dir.vx,
            self.alignment,
            self.classification.value,
        ]


RADICAL_CSV_HEADER = ["s", "t", "x", "rad_t", "rad_x", "tan_t", "tan_x", "alignment", "class"]


@dataclass
class Classification:
    reports: list[RadicalReport]
    tangency_points: list[ChartPoint]
    skipped: list[ChartPoint] = field(default_factory=list)

    @property
    def n_tangent(self) -> int:
        return sum(r.classification is RadicalClass.TANGENT for r in self.reports)


def radical_classification(
    m: MetricSpec,
    locus: Polyline | Sequence[Polyline],
    h=None,
    tol_tangent: float = TOL_TANGENT,
    tol_grad: float = TOL_GRAD,
    tol_arc: float = 1e-12,
) -> Classification:
    """Classify the radical against the tangent of H at every locus vertex.

    Tangency points are refined where the signed cross product between the
    radical and the H-tangent changes sign along a polyline segment.
    """
    polylines = _polylines(locus)
    if not polylines or all(len(p) == 0 for p in polylines):
        raise ValueError("locus is empty")
    hdef = _as_defining(m, h)

    def local(q):
        gtt, gtx, gxx = (float(c) for c in m.components(q[0], q[1]))
        r = _null_direction(np.array([[gtt, gtx], [gtx, gxx]]))
        gt, gx = (float(c) for c in hdef.gradient(q[0], q[1]))
        return r, np.array([-gx, gt])

    reports: list[RadicalReport] = []
    skipped: list[ChartPoint] = []
    roots: list[np.ndarray] = []
    for pl in polylines:
        pts = pl.points
        arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        rads, tans, ok = [], [], []
        for k, q in enumerate(pts):
            r, tan = local(q)
            gnorm = float(np.linalg.norm(tan))
            p = ChartPoint(float(q[0]), float(q[1]))
            rads.append(r)
            tans.append(tan / gnorm if gnorm > tol_grad else tan)
            ok.append(gnorm > tol_grad)
            if gnorm <= tol_grad:
                skipped.append(p)
                continue
            ro = _orient(r)
            tau = tans[-1]
            align = abs(ro[0] * tau[1] - ro[1] * tau[0])
            cls = RadicalClass.TANGENT if align <= tol_tangent else RadicalClass.TRANSVERSE
            reports.append(
                RadicalReport(
                    p,
                    TangentVector(p, float(ro[0]), float(ro[1])),
                    TangentVector(p, float(tau[0]), float(tau[1])),
                    cls,
                    float(align),
                    float(arc[k]),
                )
            )
        for i, j in pl.segments:
            if not (ok[i] and ok[j]):
                continue
            ra = rads[i]
            rb = rads[j] if np.dot(rads[j], ra) >= 0 else -rads[j]
            sa = ra[0] * tans[i][1] - ra[1] * tans[i][0]
            sb = rb[0] * tans[j][1] - rb[1] * tans[j][0]
            if sa == 0.0:
                roots.append(pts[i])
                continue
            if sa * sb >= 0.0:
                continue

            def sigma(q, ra=ra):
                r, tan = local(q)
                if np.dot(r, ra) < 0:
                    r = -r
                return float(r[0] * tan[1] - r[1] * tan[0])

            roots.append(_bisect_segment(pts[i], pts[j], sigma, hdef, tol_arc))
    return Classification(reports, _dedupe(roots), skipped)


@dataclass
class ConditionReport:
    condition1_holds: bool
    condition2_holds: bool
    condition1_violations: list[ChartPoint]
    condition2_violations: list[ChartPoint]
    n_checked: int
    min_grad: float
    min_vf: float

    @property
    def violation_points(self) -> list[ChartPoint]:
        return self.condition1_violations + self.condition2_violations

    def to_json(self) -> dict:
        return {
            "condition1_holds": self.condition1_holds,
            "condition2_holds": self.condition2_holds,
            "min_grad": self.min_grad,
            "min_vf": self.min_vf,
            "n_checked": self.n_checked,
            "condition1_violations": [[p.t, p.x] for p in self.condition1_violations],
            "condition2_violations": [[p.t, p.x] for p in self.condition2_violations],
        }


def condition_checks(
    gt: MetricSpec,
    f: ScalarField,
    V: VectorField,
    locus: Polyline | Sequence[Polyline],
    tol_grad: float = TOL_GRAD,
    tol_arc: float = 1e-12,
) -> ConditionReport:
    """df != 0 on H, and V(f) != 0 on H, checked at locus vertices.

    Sign changes of V(f) between neighbouring vertices are refined to roots
    on H and reported as violations of the second condition.
    """
    polylines = _polylines(locus)
    hdef = DefiningFunction(lambda t, x: f(t, x) - 1.0, lambda t, x: (f.grad[0](t, x), f.grad[1](t, x)), "f-1")

    def vf(q):
        ft, fx = (float(c) for c in hdef.gradient(q[0], q[1]))
        vt, vx = (float(c) for c in V(q[0], q[1]))
        return vt * ft + vx * fx

    v1: list[np.ndarray] = []
    v2: list[np.ndarray] = []
    n = 0
    min_grad = math.inf
    min_vf = math.inf
    for pl in polylines:
        pts = pl.points
        if len(pts) == 0:
            continue
        n += len(pts)
        ft, fx = hdef.gradient(pts[:, 0], pts[:, 1])
        grad = np.broadcast_to(np.hypot(ft, fx), (len(pts),))
        vt, vx = V(pts[:, 0], pts[:, 1])
        vals = np.broadcast_to(vt * ft + vx * fx, (len(pts),))
        min_grad = min(min_grad, float(np.min(grad)))
        min_vf = min(min_vf, float(np.min(np.abs(vals))))
        v1.extend(pts[grad <= tol_grad])
        v2.extend(pts[np.abs(vals) <= tol_grad])
        for i, j in pl.segments:
            if abs(vals[i]) <= tol_grad or abs(vals[j]) <= tol_grad:
                continue
            if vals[i] * vals[j] < 0.0:
                v2.append(_bisect_segment(pts[i], pts[j], vf, hdef, tol_arc))
    c1 = _dedupe(v1)
    c2 = _dedupe(v2)
    return ConditionReport(
        condition1_holds=not c1 and min_grad > tol_grad,
        condition2_holds=not c2 and min_vf > tol_grad,
        condition1_violations=c1,
        condition2_violations=c2,
        n_checked=n,
        min_grad=min_grad,
        min_vf=min_vf,
    )


# -- the tangency curve t = -(1/pi) ln|sin(pi x)| + C -------------------------


def tangency_locus_curve(x_range: tuple[float, float], C: float = 0.0, n: int = 201) -> Polyline:
    lo, hi = sorted(x_range)
    if math.floor(lo) != math.floor(hi) or lo == math.floor(lo):
        raise ValueError(f"x range {x_range} touches an integer, where ln|sin(pi x)| diverges")
    x = np.linspace(lo, hi, n)
    t = -np.log(np.abs(np.sin(np.pi * x))) / np.pi + C
    return Polyline(np.column_stack([t, x]), False)


def tangency_ode_check(x0: float = 0.3, C: float = 0.0, t_span: float = 1.0, n_steps: int = 1000) -> float:
    """RK4 on dx/dt = -tan(pi x) from a point of the closed-form curve.

    Returns the largest |x_rk4 - x_exact| along the run, where x_exact solves
    t = -(1/pi) ln sin(pi x) + C on the branch containing x0.
    """
    if not 0.0 < x0 < 0.5:
        raise ValueError("x0 must lie in (0, 1/2), away from the turning point at x = 1/2")

    def rhs(x):
        return -math.tan(math.pi * x)

    t0 = -math.log(math.sin(math.pi * x0)) / math.pi + C
    h = t_span / n_steps
    x = x0
    worst = 0.0
    for k in range(1, n_steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + k * h
        exact = math.asin(math.exp(-math.pi * (t - C))) / math.pi
        worst = max(worst, abs(x - exact))
    return worst


def locus_points(locus: Iterable[Polyline]) -> np.ndarray:
    pts = [p.points for p in locus if len(p)]
    return np.concatenate(pts) if pts else np.empty((0, 2))
