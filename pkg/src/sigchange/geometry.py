"""Points, tangent objects and metric fields on a 2D chart with coordinates (t, x)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import _kernels
from .expr import ScalarField

__all__ = [
    "TOL_DEG",
    "ChartPoint",
    "TangentVector",
    "Covector",
    "Signature",
    "MetricSample",
    "Window",
    "MetricSpec",
    "FlatMinkowski",
    "RotatingMinkowski",
    "CrosscapQuadratic",
    "CustomMetric",
    "TransformedMetric",
    "VectorField",
    "rotating_unit_timelike",
    "coordinate_time",
    "rotating_metric",
    "classify",
    "eval_metric",
    "inner",
    "lower_index",
    "complete_orthonormal_frame",
    "GeometryError",
]

TOL_DEG = 1e-9
FD_STEP = 1e-5


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ChartPoint:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise GeometryError(f"non-finite chart point ({self.t}, {self.x})")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x])


@dataclass(frozen=True)
class TangentVector:
    base: ChartPoint
    vt: float
    vx: float

    def __post_init__(self):
        if not (math.isfinite(self.vt) and math.isfinite(self.vx)):
            raise GeometryError("non-finite tangent vector components")

    def as_array(self) -> np.ndarray:
        return np.array([self.vt, self.vx])


@dataclass(frozen=True)
class Covector:
    base: ChartPoint
    wt: float
    wx: float

    def as_array(self) -> np.ndarray:
        return np.array([self.wt, self.wx])


class Signature(str, Enum):
    LORENTZIAN = "Lorentzian"
    RIEMANNIAN = "Riemannian"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    DEGENERATE = "Degenerate"

    @property
    def code(self) -> str:
        return _CODES[self]


_CODES = {
    Signature.LORENTZIAN: "L",
    Signature.RIEMANNIAN: "R",
    Signature.NEGATIVE_DEFINITE: "N",
    Signature.DEGENERATE: "D",
}


class Window(NamedTuple):
    tmin: float
    tmax: float
    xmin: float
    xmax: float

    def contains(self, t, x):
        return (t >= self.tmin) & (t <= self.tmax) & (x >= self.xmin) & (x <= self.xmax)


@dataclass(frozen=True)
class MetricSample:
    g_tt: float
    g_tx: float
    g_xx: float
    det: float
    signature: Signature

    def matrix(self) -> np.ndarray:
        return np.array([[self.g_tt, self.g_tx], [self.g_tx, self.g_xx]])


def classify(g_tt, det, tol_deg: float = TOL_DEG):
    """Signature codes ('L', 'R', 'N', 'D') from det and g_tt; works on arrays."""
    det = np.asarray(det)
    g_tt = np.asarray(g_tt)
    out = np.where(det < -tol_deg, "L", np.where(np.abs(det) <= tol_deg, "D", np.where(g_tt > 0, "R", "N")))
    return out


# -- metrics ----------------------------------------------------------------


class MetricSpec:
    """Symmetric (0,2) tensor field given by three component functions.

    Subclasses implement ``components``; ``derivatives`` returns the partials
    ((d_t g_tt, d_t g_tx, d_t g_xx), (d_x g_tt, d_x g_tx, d_x g_xx)).
    """

    name = "metric"
    # (model id, parameter) when a compiled kernel exists for this metric
    kernel = None
    # True when d_t is a Killing field, so g(d_t, v) is conserved on geodesics
    stationary = False

    def components(self, t, x):
        raise NotImplementedError

    def derivatives(self, t, x):
        raise NotImplementedError

    def det(self, t, x):
        gtt, gtx, gxx = self.components(t, x)
        return gtt * gxx - gtx * gtx

    def det_gradient(self, t, x):
        gtt, gtx, gxx = self.components(t, x)
        (att, atx, axx), (btt, btx, bxx) = self.derivatives(t, x)
        return (
            att * gxx + gtt * axx - 2.0 * gtx * atx,
            btt * gxx + gtt * bxx - 2.0 * gtx * btx,
        )


@dataclass(frozen=True)
class _PresetMetric(MetricSpec):
    def components(self, t, x):
        g = _kernels.preset_metric(self.kernel[0], self.kernel[1], np.asarray(t, float), np.asarray(x, float))
        return _scalarize(g[:3])

    def derivatives(self, t, x):
        g = _kernels.preset_metric(self.kernel[0], self.kernel[1], np.asarray(t, float), np.asarray(x, float))
        return _scalarize(g[3:6]), _scalarize(g[6:9])


def _scalarize(vals):
    out = []
    for v in vals:
        v = np.asarray(v, dtype=float)
        out.append(float(v) if v.ndim == 0 else v)
    return tuple(out)


@dataclass(frozen=True)
class FlatMinkowski(_PresetMetric):
    name = "flat"
    kernel = (_kernels.MODEL_FLAT, 0.0)
    stationary = True


@dataclass(frozen=True)
class RotatingMinkowski(_PresetMetric):
    """g = -cos(2 phi) dt^2 + 2 sin(2 phi) dt dx + cos(2 phi) dx^2 with phi = angle_rate * x."""

    angle_rate: float = math.pi
    name = "rotating"
    stationary = True

    @property
    def kernel(self):
        return (_kernels.MODEL_ROTATING, float(self.angle_rate))


@dataclass(frozen=True)
class CrosscapQuadratic(_PresetMetric):
    """g = (1 - t^2) dt^2 + 2 t x dt dx + (1 - x^2) dx^2; det = 1 - t^2 - x^2."""

    name = "crosscap"
    kernel = (_kernels.MODEL_CROSSCAP, 0.0)


@dataclass(frozen=True)
class CustomMetric(MetricSpec):
    g_tt: ScalarField
    g_tx: ScalarField
    g_xx: ScalarField
    name = "custom"

    def components(self, t, x):
        return self.g_tt(t, x), self.g_tx(t, x), self.g_xx(t, x)

    def derivatives(self, t, x):
        parts = [c.grad for c in (self.g_tt, self.g_tx, self.g_xx)]
        return (
            tuple(p[0](t, x) for p in parts),
            tuple(p[1](t, x) for p in parts),
        )


@dataclass(frozen=True)
class VectorField:
    vt: ScalarField
    vx: ScalarField
    name: str = ""

    @classmethod
    def parse(cls, vt: str, vx: str, name: str = "") -> "VectorField":
        return cls(ScalarField.parse(vt), ScalarField.parse(vx), name)

    def __call__(self, t, x):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        shape = np.broadcast_shapes(t.shape, x.shape)
        vt = self.vt(t, x)
        vx = self.vx(t, x)
        if shape != ():
            vt = np.broadcast_to(vt, shape)
            vx = np.broadcast_to(vx, shape)
        return vt, vx

    def derivatives(self, t, x):
        """((d_t vt, d_t vx), (d_x vt, d_x vx))."""
        (a, b), (c, d) = self.vt.grad, self.vx.grad
        return (a(t, x), c(t, x)), (b(t, x), d(t, x))

    def at(self, p: ChartPoint) -> TangentVector:
        vt, vx = self(p.t, p.x)
        return TangentVector(p, float(vt), float(vx))

    def is_nowhere_zero(self, window: Window, n: int = 101) -> bool:
        tt, xx = np.meshgrid(np.linspace(window.tmin, window.tmax, n), np.linspace(window.xmin, window.xmax, n), indexing="ij")
        vt, vx = self(tt, xx)
        return bool(np.min(np.hypot(vt, vx)) > 0.0)

    def __str__(self) -> str:
        return f"{self.vt},{self.vx}"


def rotating_unit_timelike(angle_rate: float = math.pi) -> VectorField:
    """V = cos(phi) d_t - sin(phi) d_x; unit timelike for the rotating metric."""
    phi = "pi*x" if angle_rate == math.pi else f"{float(angle_rate)!r}*x"
    return VectorField.parse(f"cos({phi})", f"-sin({phi})", name="RotatingUnitTimelike")


def coordinate_time() -> VectorField:
    return VectorField.parse("1", "0", name="CoordinateTime")


@dataclass(frozen=True)
class TransformedMetric(MetricSpec):
    """g~ = g + f V_flat (x) V_flat, with V_flat = g(V, .)."""

    base: MetricSpec
    f: ScalarField
    V: VectorField
    name = "transformed"

    def _flat(self, t, x):
        gtt, gtx, gxx = self.base.components(t, x)
        vt, vx = self.V(t, x)
        return (gtt, gtx, gxx), (vt, vx), (gtt * vt + gtx * vx, gtx * vt + gxx * vx)

    def components(self, t, x):
        (gtt, gtx, gxx), _, (wt, wx) = self._flat(t, x)
        f = self.f(t, x)
        return gtt + f * wt * wt, gtx + f * wt * wx, gxx + f * wx * wx

    def derivatives(self, t, x):
        (gtt, gtx, gxx), (vt, vx), (wt, wx) = self._flat(t, x)
        f = self.f(t, x)
        dG = self.base.derivatives(t, x)
        dV = self.V.derivatives(t, x)
        df = (self.f.grad[0](t, x), self.f.grad[1](t, x))
        out = []
        for k in range(2):
            att, atx, axx = dG[k]
            avt, avx = dV[k]
            dwt = att * vt + atx * vx + gtt * avt + gtx * avx
            dwx = atx * vt + axx * vx + gtx * avt + gxx * avx
            out.append(
                (
                    att + df[k] * wt * wt + 2.0 * f * wt * dwt,
                    atx + df[k] * wt * wx + f * (dwt * wx + wt * dwx),
                    axx + df[k] * wx * wx + 2.0 * f * wx * dwx,
                )
            )
        return out[0], out[1]


def rotating_metric(angle_rate: float = math.pi) -> RotatingMinkowski:
    if not math.isfinite(angle_rate):
        raise ValueError("angle_rate must be finite")
    return RotatingMinkowski(float(angle_rate))


# -- pointwise operations ---------------------------------------------------


def eval_metric(m: MetricSpec, p: ChartPoint, tol_deg: float = TOL_DEG) -> MetricSample:
    gtt, gtx, gxx = (float(c) for c in m.components(p.t, p.x))
    det = gtt * gxx - gtx * gtx
    if det < -tol_deg:
        sig = Signature.LORENTZIAN
    elif abs(det) <= tol_deg:
        sig = Signature.DEGENERATE
    elif gtt > 0:
        sig = Signature.RIEMANNIAN
    else:
        sig = Signature.NEGATIVE_DEFINITE
    return MetricSample(gtt, gtx, gxx, det, sig)


def inner(m: MetricSpec, u: TangentVector, v: TangentVector) -> float:
    if u.base != v.base:
        raise GeometryError(f"vectors live at different points {u.base} and {v.base}")
    gtt, gtx, gxx = m.components(u.base.t, u.base.x)
    return float(gtt * u.vt * v.vt + gtx * (u.vt * v.vx + u.vx * v.vt) + gxx * u.vx * v.vx)


def lower_index(m: MetricSpec, V: VectorField, p: ChartPoint) -> Covector:
    gtt, gtx, gxx = m.components(p.t, p.x)
    vt, vx = (float(c) for c in V(p.t, p.x))
    return Covector(p, float(gtt * vt + gtx * vx), float(gtx * vt + gxx * vx))


def complete_orthonormal_frame(m: MetricSpec, V: VectorField, p: ChartPoint, tol_deg: float = TOL_DEG) -> TangentVector:
    """Unit spacelike E1 with g(V, E1) = 0; sign fixed by E1.vx > 0 (then E1.vt > 0)."""
    sample = eval_metric(m, p, tol_deg)
    if sample.signature is not Signature.LORENTZIAN:
        raise GeometryError(f"metric is {sample.signature.value} at {p}")
    v = V.at(p)
    if inner(m, v, v) >= 0:
        raise GeometryError(f"V is not timelike at {p}")
    w = lower_index(m, V, p)
    # g(V, e) = w(e) = 0 for e = (w_x, -w_t)
    e = TangentVector(p, w.wx, -w.wt)
    norm2 = inner(m, e, e)
    scale = 1.0 / math.sqrt(norm2)
    et, ex = e.vt * scale, e.vx * scale
    if ex < 0 or (ex == 0 and et < 0):
        et, ex = -et, -ex
    return TangentVector(p, et, ex)
