"""Light cones, the Killing field d_t, stationary stripes and the trapping experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import integrate_geodesics
from .geometry import (
    ChartPoint,
    GeometryError,
    MetricSpec,
    RotatingMinkowski,
    Signature,
    TangentVector,
    VectorField,
    complete_orthonormal_frame,
    eval_metric,
    rotating_unit_timelike,
)
from .quotient import ManifoldSpec

__all__ = [
    "VERTICAL",
    "KILLING_TOL",
    "CausalKind",
    "StripeId",
    "TrappingReport",
    "null_slopes",
    "null_slopes_grid",
    "null_curve_closed_form",
    "null_curve_ode_check",
    "killing_character",
    "stripe_of",
    "future_null_directions",
    "timelike_direction",
    "sample_causal_direction",
    "trapping_experiment",
    "curve_rng",
]

VERTICAL = math.inf  # dt/dx of a cone edge along d_t
KILLING_TOL = 1e-12
SLOPE_TOL = 1e-12


class CausalKind(str, Enum):
    TIMELIKE = "Timelike"
    NULL = "Null"
    SPACELIKE = "Spacelike"


def _slopes(gtt, gtx, gxx):
    """Roots of gtt s^2 + 2 gtx s + gxx = 0 for s = dt/dx, as (slope1, slope2).

    slope1 = (-gtx + r) / gtt and slope2 = (-gtx - r) / gtt with r = sqrt(-det),
    evaluated through whichever of the two equivalent forms avoids cancellation.
    """
    r = math.sqrt(gtx * gtx - gtt * gxx)
    if abs(gtt) <= SLOPE_TOL:
        if gtx == 0.0:
            raise GeometryError("no light cone: g_tt and g_tx both vanish")
        finite = -gxx / (2.0 * gtx)
        return (VERTICAL, finite) if gtx < 0 else (finite, VERTICAL)
    if gtx >= 0:
        s2 = (-gtx - r) / gtt
        s1 = gxx / (gtt * s2) if s2 != 0 else (-gtx + r) / gtt
    else:
        s1 = (-gtx + r) / gtt
        s2 = gxx / (gtt * s1) if s1 != 0 else (-gtx - r) / gtt
    return s1, s2


def null_slopes(m: MetricSpec, p: ChartPoint) -> tuple[float, float]:
    sample = eval_metric(m, p)
    if sample.signature is not Signature.LORENTZIAN:
        raise GeometryError(f"no real light cone at {p}: metric is {sample.signature.value}")
    return _slopes(sample.g_tt, sample.g_tx, sample.g_xx)


def null_slopes_grid(gtt, gtx, gxx, codes):
    """Vectorized slopes for field sampling; NaN where the class is not Lorentzian."""
    gtt, gtx, gxx = (np.asarray(a, float) for a in (gtt, gtx, gxx))
    s1 = np.full(gtt.shape, np.nan)
    s2 = np.full(gtt.shape, np.nan)
    for idx in zip(*np.nonzero(codes == "L")):
        s1[idx], s2[idx] = _slopes(float(gtt[idx]), float(gtx[idx]), float(gxx[idx]))
    return s1, s2


def null_curve_closed_form(branch: int, x: float, C: float = 0.0) -> float:
    """t(x) of the rotating metric's null curves: branch 1 uses sin+cos, branch 2 cos-sin."""
    s, c = math.sin(math.pi * x), math.cos(math.pi * x)
    if branch == 1:
        arg = s + c
    elif branch == 2:
        arg = c - s
    else:
        raise ValueError("branch must be 1 or 2")
    if abs(arg) < 1e-15:
        raise ValueError(f"x = {x} is singular for branch {branch}: the cone edge is vertical there")
    return -math.log(abs(arg)) / math.pi + C


def null_curve_ode_check(
    branch: int,
    x_end: float = 0.2,
    n_steps: int = 2000,
    m: MetricSpec | None = None,
    t0: float = 0.0,
    x0: float = 0.0,
) -> float:
    """RK4 on dt/dx = slope_branch(x) from (t0, x0); max |t - closed form| along the way."""
    m = m or RotatingMinkowski()
    C = t0 - null_curve_closed_form(branch, x0)

    def rhs(x):
        gtt, gtx, gxx = (float(c) for c in m.components(0.0, x))
        return _slopes(gtt, gtx, gxx)[branch - 1]

    h = (x_end - x0) / n_steps
    t, x = t0, x0
    worst = 0.0
    for _ in range(n_steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h)
        k3 = k2
        k4 = rhs(x + h)
        t += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h
        worst = max(worst, abs(t - null_curve_closed_form(branch, x, C)))
    return worst


def killing_character(x: float, angle_rate: float = math.pi, tol: float = KILLING_TOL) -> tuple[CausalKind, float]:
    """Causal type of d_t for the rotating metric; value g(d_t, d_t) = -cos(2 angle_rate x)."""
    value = -math.cos(2.0 * angle_rate * x)
    if abs(value) <= tol:
        return CausalKind.NULL, value
    return (CausalKind.TIMELIKE if value < 0 else CausalKind.SPACELIKE), value


@dataclass(frozen=True)
class StripeId:
    k: int

    @property
    def bounds(self) -> tuple[float, float]:
        return ((4 * self.k - 1) / 4.0, (4 * self.k + 1) / 4.0)

    def contains(self, x) -> bool:
        lo, hi = self.bounds
        return lo < x < hi


def stripe_of(x: float) -> StripeId | None:
    k = int(round(x))
    s = StripeId(k)
    return s if s.contains(x) else None


# -- cone sampling ----------------------------------------------------------


def future_null_directions(m: MetricSpec, p: ChartPoint, V: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """The two Euclidean-unit null vectors at p with g(V, n) < 0."""
    sample = eval_metric(m, p)
    if sample.signature is not Signature.LORENTZIAN:
        raise GeometryError(f"no real light cone at {p}: metric is {sample.signature.value}")
    G = sample.matrix()
    lam, Q = np.linalg.eigh(G)  # lam[0] < 0 < lam[1]
    a = Q[:, 0] / math.sqrt(-lam[0])
    b = Q[:, 1] / math.sqrt(lam[1])
    vt, vx = (float(c) for c in V(p.t, p.x))
    w = G @ np.array([vt, vx])
    out = []
    for n in (a + b, a - b):
        n = n / np.linalg.norm(n)
        if float(w @ n) > 0:
            n = -n
        out.append(n)
    return out[0], out[1]


def _angle(v):
    return math.atan2(v[1], v[0])


def _between(u, v, frac):
    """Direction at fraction frac of the way from u to v along the shorter arc."""
    a = _angle(u)
    d = math.atan2(u[0] * v[1] - u[1] * v[0], float(u @ v))
    ang = a + frac * d
    return np.array([math.cos(ang), math.sin(ang)])


def timelike_direction(m: MetricSpec, p: ChartPoint, frac: float, time_orientation: VectorField | None = None) -> TangentVector:
    """Euclidean-unit future timelike direction at angle fraction ``frac`` in (0, 1) of the cone."""
    if not 0.0 < frac < 1.0:
        raise ValueError("frac must lie strictly between 0 and 1")
    n1, n2 = future_null_directions(m, p, time_orientation or rotating_unit_timelike())
    d = _between(n1, n2, frac)
    return TangentVector(p, float(d[0]), float(d[1]))


def sample_causal_direction(
    m: MetricSpec,
    p: ChartPoint,
    rng: np.random.Generator,
    kind: CausalKind | str = CausalKind.TIMELIKE,
    time_orientation: VectorField | None = None,
) -> TangentVector:
    """Euclidean-unit direction drawn uniformly in angle inside the requested sector.

    Timelike: strictly between the two future null directions. Null: one of
    them. Spacelike: the spacelike sector containing the frame vector E1
    orthogonal to the orientation field (used for control runs).
    """
    kind = CausalKind(kind)
    V = time_orientation or rotating_unit_timelike()
    n1, n2 = future_null_directions(m, p, V)
    u = float(rng.random())
    if kind is CausalKind.NULL:
        d = n1 if u < 0.5 else n2
    elif kind is CausalKind.TIMELIKE:
        # keep away from the boundary so the strict inequality survives rounding
        d = _between(n1, n2, 1e-6 + (1.0 - 2e-6) * u)
    else:
        e1 = complete_orthonormal_frame(m, V, p)
        e = np.array([e1.vt, e1.vx])
        coef = np.linalg.solve(np.column_stack([n1, n2]), e)
        lo, hi = (n1, -n2) if coef[0] > 0 else (-n1, n2)
        d = _between(lo, hi, 1e-6 + (1.0 - 2e-6) * u)
    return TangentVector(p, float(d[0]), float(d[1]))


# -- trapping ---------------------------------------------------------------


@dataclass
class TrappingReport:
    stripe: StripeId
    n_curves: int
    n_escaped: int
    max_excursion: float
    min_E: float
    max_E: float
    seed: int
    kind: CausalKind = CausalKind.TIMELIKE
    max_killing_norm: float = -math.inf  # largest g(d_t, d_t) seen on any sample
    statuses: dict | None = None

    def to_json(self) -> dict:
        return {
            "k": self.stripe.k,
            "n_curves": self.n_curves,
            "n_escaped": self.n_escaped,
            "max_excursion": self.max_excursion,
            "min_E": self.min_E,
            "max_E": self.max_E,
            "seed": self.seed,
        }


def curve_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream per curve, so results do not depend on evaluation order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _polyline(m, start, rng, kind, V, lam_max, step):
    n = int(round(lam_max / step))
    pts = [start]
    energies = []
    p = start
    for _ in range(n):
        v = sample_causal_direction(m, p, rng, kind, V)
        gtt, gtx, _ = (float(c) for c in m.components(p.t, p.x))
        energies.append(gtt * v.vt + gtx * v.vx)
        q = ChartPoint(p.t + step * v.vt, p.x + step * v.vx)
        pts.append(q)
        p = q
        if eval_metric(m, p).signature is not Signature.LORENTZIAN:
            break
    return np.array([[q.t, q.x] for q in pts]), np.array(energies)


def trapping_experiment(
    m: MetricSpec | None = None,
    k: int = 0,
    n_curves: int = 200,
    lam_max: float = 10.0,
    mix: str = "both",
    seed: int = 0,
    kind: CausalKind | str = CausalKind.TIMELIKE,
    dlam: float = 1e-3,
    poly_step: float = 0.05,
    margin: float = 1e-6,
    start_halfwidth: float = 0.2,
    use_numba: bool | None = None,
) -> TrappingReport:
    """Launch causal curves from random points of stripe k and see whether any leaves.

    mix="both" spends the first half of the budget on geodesics and the rest
    on polylines that re-sample a direction every ``poly_step``. With
    kind=Timelike the geodesics alternate between timelike and null starts.
    """
    if n_curves < 1:
        raise ValueError("n_curves must be at least 1")
    if mix not in ("both", "geodesics", "polylines"):
        raise ValueError(f"unknown mix {mix!r}")
    m = m or RotatingMinkowski()
    kind = CausalKind(kind)
    V = rotating_unit_timelike(getattr(m, "angle_rate", math.pi))
    stripe = StripeId(k)
    n_geo = {"both": n_curves // 2, "geodesics": n_curves, "polylines": 0}[mix]

    starts, kinds = [], []
    for i in range(n_curves):
        rng = curve_rng(seed, i)
        p = ChartPoint(float(rng.uniform(-1.0, 1.0)), k + float(rng.uniform(-start_halfwidth, start_halfwidth)))
        if kind is CausalKind.TIMELIKE and i < n_geo:
            ck = CausalKind.TIMELIKE if i % 2 == 0 else CausalKind.NULL
        else:
            ck = kind
        starts.append((p, rng))
        kinds.append(ck)

    excursions, e_min, e_max = [], math.inf, -math.inf
    killing_max = -math.inf
    statuses: dict[str, int] = {}
    inits = [sample_causal_direction(m, p, rng, kinds[i], V) for i, (p, rng) in enumerate(starts[:n_geo])]
    if inits:
        traces = integrate_geodesics(m, ManifoldSpec(), inits, lam_max, dlam, use_numba=use_numba)
        for tr in traces:
            excursions.append(float(np.max(np.abs(tr.x - k))))
            e_min = min(e_min, float(np.min(tr.energy)))
            e_max = max(e_max, float(np.max(tr.energy)))
            gtt = m.components(tr.t, tr.x)[0]
            killing_max = max(killing_max, float(np.max(gtt)))
            statuses[tr.status.value] = statuses.get(tr.status.value, 0) + 1
    for i in range(n_geo, n_curves):
        p, rng = starts[i]
        pts, energies = _polyline(m, p, rng, kinds[i], V, lam_max, poly_step)
        excursions.append(float(np.max(np.abs(pts[:, 1] - k))))
        if len(energies):
            e_min = min(e_min, float(np.min(energies)))
            e_max = max(e_max, float(np.max(energies)))
        gtt = m.components(pts[:, 0], pts[:, 1])[0]
        killing_max = max(killing_max, float(np.max(gtt)))
        statuses["Polyline"] = statuses.get("Polyline", 0) + 1
    excursions = np.array(excursions)
    escaped = int(np.sum(excursions >= 0.25 - margin))
    return TrappingReport(
        stripe,
        n_curves,
        escaped,
        float(np.max(excursions)),
        e_min,
        e_max,
        seed,
        kind,
        killing_max,
        statuses,
    )

