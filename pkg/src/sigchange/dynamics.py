"""Christoffel symbols, scalar curvature and geodesics away from the degeneracy locus."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .geometry import TOL_DEG, ChartPoint, GeometryError, MetricSpec, TangentVector
from .quotient import ManifoldSpec, OutsideDomainError, transport_vector

__all__ = [
    "FD_STEP",
    "NORM_GUARD",
    "ChristoffelSample",
    "GeodesicStatus",
    "GeodesicTrace",
    "christoffel_numeric",
    "christoffel_closed_rotating",
    "christoffel_identity_audit",
    "scalar_curvature",
    "scalar_curvature_riemann",
    "integrate_geodesic",
    "integrate_geodesics",
]

FD_STEP = 1e-5
# relative drift of g(v, v) beyond which a step is treated as failed; fixed-step
# RK4 cannot follow the coordinate blow-up of geodesics that run into a horizon
NORM_GUARD = 1e-8

_NAMES = ("ttt", "ttx", "txx", "xtt", "xtx", "xxx")


@dataclass(frozen=True)
class ChristoffelSample:
    point: ChartPoint
    t_tt: float
    t_tx: float
    t_xx: float
    x_tt: float
    x_tx: float
    x_xx: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t_tt, self.t_tx, self.t_xx, self.x_tt, self.x_tx, self.x_xx])


def _fd_partials(m: MetricSpec, t, x, h):
    c0 = m.components(t + h, x)
    c1 = m.components(t - h, x)
    d0 = m.components(t, x + h)
    d1 = m.components(t, x - h)
    dt = tuple((a - b) / (2 * h) for a, b in zip(c0, c1))
    dx = tuple((a - b) / (2 * h) for a, b in zip(d0, d1))
    return dt, dx


def christoffel_numeric(m: MetricSpec, p: ChartPoint, h: float = FD_STEP, tol_deg: float = TOL_DEG) -> ChristoffelSample:
    """Levi-Civita symbols from central differences of the metric components."""
    if h <= 0:
        raise ValueError("h must be positive")
    gtt, gtx, gxx = (float(c) for c in m.components(p.t, p.x))
    if abs(gtt * gxx - gtx * gtx) <= tol_deg:
        raise GeometryError(f"metric is degenerate at {p}; no inverse")
    dt, dx = _fd_partials(m, p.t, p.x, h)
    vals = _kernels.christoffel(gtt, gtx, gxx, *dt, *dx)
    return ChristoffelSample(p, *(float(v) for v in vals))


def christoffel_closed_rotating(angle_rate: float, p: ChartPoint) -> ChristoffelSample:
    """Closed forms for the rotating metric with phi = angle_rate * x."""
    a = float(angle_rate)
    phi = a * p.x
    s2 = math.sin(2 * phi)
    s4 = math.sin(4 * phi)
    c4 = math.cos(4 * phi)
    half = 0.5 * a * s4
    return ChristoffelSample(
        p,
        t_tt=-a * s2 * s2,
        t_tx=-half,
        t_xx=-0.5 * a * (3.0 + c4),
        x_tt=-half,
        x_tx=a * s2 * s2,
        x_xx=half,
    )


# each entry: (label, left, right, sign) meaning left == sign * right
_ROTATING_IDENTITIES = (
    ("G^x_xx = -G^t_tx", "x_xx", "t_tx", -1.0),
    ("G^x_xx = -G^x_tt", "x_xx", "x_tt", -1.0),
    ("G^x_tx = -G^t_tt", "x_tx", "t_tt", -1.0),
)


def christoffel_identity_audit(m: MetricSpec, points, h: float = FD_STEP) -> list[dict]:
    """Check the pairwise identities of the closed-form list against the numeric symbols."""
    samples = [christoffel_numeric(m, p, h) for p in points]
    out = []
    for label, left, right, sign in _ROTATING_IDENTITIES:
        worst = max(abs(getattr(s, left) - sign * getattr(s, right)) for s in samples)
        out.append({"identity": label, "max_residual": worst, "holds": worst <= 1e-4})
    return out


def _second(m: MetricSpec, t, x, h):
    """Second partials (tt, tx, xx) of each component, by central differences of the first."""
    tp, tm = m.derivatives(t + h, x), m.derivatives(t - h, x)
    xp, xm = m.derivatives(t, x + h), m.derivatives(t, x - h)
    d_tt = tuple((u - v) / (2 * h) for u, v in zip(tp[0], tm[0]))
    d_tx = tuple((u - v) / (2 * h) for u, v in zip(tp[1], tm[1]))
    d_xx = tuple((u - v) / (2 * h) for u, v in zip(xp[1], xm[1]))
    return d_tt, d_tx, d_xx


def scalar_curvature(m: MetricSpec, p: ChartPoint, h: float = FD_STEP, tol_deg: float = TOL_DEG) -> float:
    """R = 2K with K from the Brioschi formula; coordinates (u, v) = (t, x)."""
    E, F, G = (float(c) for c in m.components(p.t, p.x))
    det = E * G - F * F
    if abs(det) <= tol_deg:
        raise GeometryError(f"metric is degenerate at {p}")
    (Eu, Fu, Gu), (Ev, Fv, Gv) = (tuple(float(c) for c in d) for d in m.derivatives(p.t, p.x))
    d_uu, d_uv, d_vv = _second(m, p.t, p.x, h)
    Evv = float(d_vv[0])
    Fuv = float(d_uv[1])
    Guu = float(d_uu[2])
    A = np.array(
        [
            [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
            [Fv - 0.5 * Gu, E, F],
            [0.5 * Gv, F, G],
        ]
    )
    B = np.array(
        [
            [0.0, 0.5 * Ev, 0.5 * Gu],
            [0.5 * Ev, E, F],
            [0.5 * Gu, F, G],
        ]
    )
    K = (np.linalg.det(A) - np.linalg.det(B)) / (det * det)
    return float(2.0 * K)


def scalar_curvature_riemann(m: MetricSpec, p: ChartPoint, h: float = FD_STEP) -> float:
    """Independent route: R_txtx from Christoffels and their differences, R = 2 R_txtx / det."""

    def gam(t, x):
        g = m.components(t, x)
        d = m.derivatives(t, x)
        v = _kernels.christoffel(*(float(c) for c in g), *(float(c) for c in d[0]), *(float(c) for c in d[1]))
        # index as G[a][b][c] with 0 = t, 1 = x
        return np.array([[[v[0], v[1]], [v[1], v[2]]], [[v[3], v[4]], [v[4], v[5]]]])

    G0 = gam(p.t, p.x)
    dG = [
        (gam(p.t + h, p.x) - gam(p.t - h, p.x)) / (2 * h),
        (gam(p.t, p.x + h) - gam(p.t, p.x - h)) / (2 * h),
    ]
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    b, c, d = 1, 0, 1
    Rup = np.array(
        [
            dG[c][a, d, b] - dG[d][a, c, b] + G0[a, c, :] @ G0[:, d, b] - G0[a, d, :] @ G0[:, c, b]
            for a in range(2)
        ]
    )
    gtt, gtx, gxx = (float(v) for v in m.components(p.t, p.x))
    R_txtx = gtt * Rup[0] + gtx * Rup[1]
    det = gtt * gxx - gtx * gtx
    return float(2.0 * R_txtx / det)


# -- geodesics --------------------------------------------------------------


class GeodesicStatus(str, Enum):
    COMPLETED = "Completed"
    HIT_DEGENERACY = "HitDegeneracy"
    LEFT_WINDOW = "LeftWindow"
    STEP_FAILURE = "StepFailure"


_STATUS = {
    _kernels.STATUS_COMPLETED: GeodesicStatus.COMPLETED,
    _kernels.STATUS_HIT_DEGENERACY: GeodesicStatus.HIT_DEGENERACY,
    _kernels.STATUS_LEFT_WINDOW: GeodesicStatus.LEFT_WINDOW,
    _kernels.STATUS_STEP_FAILURE: GeodesicStatus.STEP_FAILURE,
}


@dataclass
class GeodesicTrace:
    lam: np.ndarray
    t: np.ndarray
    x: np.ndarray
    vt: np.ndarray
    vx: np.ndarray
    energy: np.ndarray
    norm2: np.ndarray
    status: GeodesicStatus
    seam_events: list[tuple[float, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.lam)

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm2 - self.norm2[0])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "t", "x", "vt", "vx", "E", "norm2"])
        for row in zip(self.lam, self.t, self.x, self.vt, self.vx, self.energy, self.norm2):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def seam_events_json(self) -> list[dict]:
        return [{"lambda": lam, "seam": s} for lam, s in self.seam_events]


def _geom_for(m: MetricSpec):
    def geom(t, x):
        g = m.components(t, x)
        dt, dx = m.derivatives(t, x)
        shape = np.shape(t)
        return tuple(np.broadcast_to(np.asarray(v, dtype=float), shape) for v in (*g, *dt, *dx))

    return geom


def integrate_geodesics(
    m: MetricSpec,
    man: ManifoldSpec,
    inits: list[TangentVector],
    lam_max: float,
    dlam: float = 1e-3,
    window=None,
    tol_deg: float = TOL_DEG,
    norm_guard: float = NORM_GUARD,
    use_numba: bool | None = None,
) -> list[GeodesicTrace]:
    """Fixed-step RK4 for a batch of initial vectors; compiled kernel for preset metrics.

    A curve stops when g(v, v), or g(d_t, v) on a stationary metric, drifts by
    more than ``norm_guard`` relative to its start.
    """
    if dlam <= 0:
        raise ValueError("dlam must be positive")
    if lam_max < 0:
        raise ValueError("lam_max must be non-negative")
    states = []
    for v in inits:
        try:
            v = transport_vector(man, v)
        except OutsideDomainError as exc:
            raise GeometryError(str(exc)) from exc
        gtt, gtx, gxx = (float(c) for c in m.components(v.base.t, v.base.x))
        if abs(gtt * gxx - gtx * gtx) < 10 * tol_deg:
            raise GeometryError(f"initial point {v.base} is degenerate")
        states.append([v.base.t, v.base.x, v.vt, v.vx])
    states = np.array(states, dtype=float).reshape(-1, 4)
    nsteps = int(round(lam_max / dlam))
    win = np.array(window if window is not None else (-np.inf, np.inf, -np.inf, np.inf), dtype=float)
    deg_stop = 10 * tol_deg
    if m.kernel is not None:
        model, a = m.kernel
        traj, seams, n_rec, status = _kernels.integrate_preset(
            model, a, man.code, states, dlam, nsteps, win, deg_stop, norm_guard, m.stationary, use_numba=use_numba
        )
    else:
        traj, seams, n_rec, status = _kernels.integrate_batch_numpy(
            _geom_for(m), man.code, states, dlam, nsteps, win, deg_stop, norm_guard, m.stationary
        )
    traces = []
    for i in range(len(states)):
        k = int(n_rec[i])
        t, x, vt, vx = (traj[i, :k, j].copy() for j in range(4))
        gtt, gtx, gxx = m.components(t, x)
        energy = np.broadcast_to(gtt * vt + gtx * vx, t.shape).astype(float)
        norm2 = np.broadcast_to(gtt * vt * vt + 2.0 * gtx * vt * vx + gxx * vx * vx, t.shape).astype(float)
        lam = np.arange(k) * dlam
        events = [(float(lam[j]), man.seam_name(int(seams[i, j]))) for j in np.nonzero(seams[i, :k])[0]]
        traces.append(GeodesicTrace(lam, t, x, vt, vx, energy, norm2, _STATUS[int(status[i])], events))
    return traces


def integrate_geodesic(
    m: MetricSpec,
    man: ManifoldSpec,
    init: TangentVector,
    lam_max: float,
    dlam: float = 1e-3,
    window=None,
    tol_deg: float = TOL_DEG,
    norm_guard: float = NORM_GUARD,
    use_numba: bool | None = None,
) -> GeodesicTrace:
    return integrate_geodesics(m, man, [init], lam_max, dlam, window, tol_deg, norm_guard, use_numba)[0]
