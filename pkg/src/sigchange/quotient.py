"""Fundamental domains and seam identifications.

Topologies:

* ``plane``          -- R^2, no seams
* ``mobius-inf``     -- (t, x) ~ ((-1)^k t, x + k), domain x in [0, 1)
* ``mobius-compact`` -- [0,1] x [0,1) with (t, 0) ~ (1 - t, 1)
* ``rp2``            -- square [-r, r)^2, r = sqrt(2), with (t, -r) ~ (-t, r)
                        and (-r, x) ~ (r, -x)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import _kernels
from .geometry import ChartPoint, MetricSpec, TangentVector, VectorField

__all__ = [
    "Topology",
    "ManifoldSpec",
    "Seam",
    "Germ",
    "SeamReport",
    "OutsideDomainError",
    "canonicalize",
    "canonicalize_arrays",
    "transport_vector",
    "seam_compatibility",
    "vector_field_seam_check",
    "attach_psi",
    "SEAM_FD_STEP",
]

SEAM_FD_STEP = 1e-5
R2 = math.sqrt(2.0)


class OutsideDomainError(ValueError):
    pass


class Topology(str, Enum):
    PLANE = "plane"
    MOBIUS_INF = "mobius-inf"
    MOBIUS_COMPACT = "mobius-compact"
    RP2 = "rp2"


_TOPO_CODES = {
    Topology.PLANE: _kernels.TOPO_PLANE,
    Topology.MOBIUS_INF: _kernels.TOPO_MOBIUS_INF,
    Topology.MOBIUS_COMPACT: _kernels.TOPO_MOBIUS_COMPACT,
    Topology.RP2: _kernels.TOPO_RP2,
}

_ALIASES = {
    "Plane": Topology.PLANE,
    "InfiniteMobius": Topology.MOBIUS_INF,
    "CompactMobius": Topology.MOBIUS_COMPACT,
    "RP2Square": Topology.RP2,
}

MapFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Germ:
    """One application of an identification near an edge, with its inverse."""

    edge: str
    forward: MapFn
    inverse: MapFn
    jacobian: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class Seam:
    """An identified edge pair; ``near(s)`` walks the near edge, ``deck`` maps it across."""

    id: str
    near: MapFn
    deck: MapFn
    jacobian: np.ndarray = field(compare=False)
    normal: str  # coordinate transverse to the seam: "t" or "x"
    s_range: tuple[float, float]


def _mobius_inf_seams() -> list[Seam]:
    return [
        Seam(
            "x=0~x=1",
            near=lambda s: (s, np.zeros_like(s)),
            deck=lambda t, x: (-t, x + 1.0),
            jacobian=np.diag([-1.0, 1.0]),
            normal="x",
            s_range=(-2.0, 2.0),
        )
    ]


def _mobius_compact_seams() -> list[Seam]:
    return [
        Seam(
            "x=0~x=1",
            near=lambda s: (s, np.zeros_like(s)),
            deck=lambda t, x: (1.0 - t, x + 1.0),
            jacobian=np.diag([-1.0, 1.0]),
            normal="x",
            s_range=(0.0, 1.0),
        )
    ]


def _rp2_seams() -> list[Seam]:
    return [
        Seam(
            "x=-r~x=r",
            near=lambda s: (s, np.full_like(s, -R2)),
            deck=lambda t, x: (-t, x + 2.0 * R2),
            jacobian=np.diag([-1.0, 1.0]),
            normal="x",
            s_range=(-R2, R2),
        ),
        Seam(
            "t=-r~t=r",
            near=lambda s: (np.full_like(s, -R2), s),
            deck=lambda t, x: (t + 2.0 * R2, -x),
            jacobian=np.diag([1.0, -1.0]),
            normal="t",
            s_range=(-R2, R2),
        ),
    ]


def _germs(topology: Topology) -> list[Germ]:
    flip_t = np.diag([-1.0, 1.0])
    flip_x = np.diag([1.0, -1.0])
    if topology is Topology.MOBIUS_INF:
        return [
            Germ("x>=1", lambda t, x: (-t, x - 1.0), lambda t, x: (-t, x + 1.0), flip_t),
            Germ("x<0", lambda t, x: (-t, x + 1.0), lambda t, x: (-t, x - 1.0), flip_t),
        ]
    if topology is Topology.MOBIUS_COMPACT:
        return [
            Germ("x>=1", lambda t, x: (1.0 - t, x - 1.0), lambda t, x: (1.0 - t, x + 1.0), flip_t),
            Germ("x<0", lambda t, x: (1.0 - t, x + 1.0), lambda t, x: (1.0 - t, x - 1.0), flip_t),
        ]
    if topology is Topology.RP2:
        s = 2.0 * R2
        return [
            Germ("x<-r", lambda t, x: (-t, x + s), lambda t, x: (-t, x - s), flip_t),
            Germ("x>=r", lambda t, x: (-t, x - s), lambda t, x: (-t, x + s), flip_t),
            Germ("t<-r", lambda t, x: (t + s, -x), lambda t, x: (t - s, -x), flip_x),
            Germ("t>=r", lambda t, x: (t - s, -x), lambda t, x: (t + s, -x), flip_x),
        ]
    return []


@dataclass(frozen=True)
class ManifoldSpec:
    topology: Topology = Topology.PLANE

    @classmethod
    def of(cls, name: str) -> "ManifoldSpec":
        """By CLI name ("mobius-inf") or type name ("InfiniteMobius")."""
        if name in _ALIASES:
            return cls(_ALIASES[name])
        try:
            return cls(Topology(name))
        except ValueError:
            raise ValueError(f"unknown topology {name!r}") from None

    @property
    def code(self) -> int:
        return _TOPO_CODES[self.topology]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(tmin, tmax, xmin, xmax) of the fundamental domain."""
        inf = math.inf
        return {
            Topology.PLANE: (-inf, inf, -inf, inf),
            Topology.MOBIUS_INF: (-inf, inf, 0.0, 1.0),
            Topology.MOBIUS_COMPACT: (0.0, 1.0, 0.0, 1.0),
            Topology.RP2: (-R2, R2, -R2, R2),
        }[self.topology]

    @property
    def seams(self) -> list[Seam]:
        return {
            Topology.PLANE: list,
            Topology.MOBIUS_INF: _mobius_inf_seams,
            Topology.MOBIUS_COMPACT: _mobius_compact_seams,
            Topology.RP2: _rp2_seams,
        }[self.topology]()

    @property
    def germs(self) -> list[Germ]:
        return _germs(self.topology)

    def seam_name(self, bits: int) -> str:
        seams = self.seams
        names = []
        if bits & _kernels.SEAM_X and seams:
            names.append(seams[0].id)
        if bits & _kernels.SEAM_T and len(seams) > 1:
            names.append(seams[1].id)
        return "+".join(names)


def canonicalize_arrays(man: ManifoldSpec, t, x):
    """Vectorized canonicalization: (t, x, jt, jx, seam_bits, code)."""
    return _kernels.canonicalize(man.code, np.asarray(t, float), np.asarray(x, float))


def canonicalize(man: ManifoldSpec, raw: ChartPoint) -> tuple[ChartPoint, np.ndarray]:
    tc, xc, jt, jx, _, code = (float(v) for v in _kernels.canonicalize(man.code, raw.t, raw.x))
    if code == _kernels.CANON_OFF_EDGE:
        raise OutsideDomainError(f"{raw} lies beyond the boundary of the {man.topology.value} domain")
    if code == _kernels.CANON_TOO_DEEP:
        raise OutsideDomainError(f"{raw} is more than one germ away from the {man.topology.value} square")
    return ChartPoint(tc, xc), np.diag([jt, jx])


def transport_vector(man: ManifoldSpec, v: TangentVector) -> TangentVector:
    p, J = canonicalize(man, v.base)
    w = J @ np.array([v.vt, v.vx])
    return TangentVector(p, float(w[0]), float(w[1]))


@dataclass
class SeamReport:
    seam: str
    order: int
    s: np.ndarray
    delta: np.ndarray  # (n, 3) metric mismatches or (n, 2) vector mismatches
    kind: str = "metric"

    @property
    def max_abs_mismatch(self) -> float:
        return float(np.max(np.abs(self.delta))) if self.delta.size else 0.0

    def to_json(self) -> dict:
        if self.kind == "metric":
            names = ("dgtt", "dgtx", "dgxx")
        else:
            names = ("dvt", "dvx")
        samples = [
            {"s": float(s), **{k: float(v) for k, v in zip(names, row)}}
            for s, row in zip(self.s, self.delta)
        ]
        return {
            "seam": self.seam,
            "order": self.order,
            "samples": samples,
            "max_abs_mismatch": self.max_abs_mismatch,
        }


def _pullback(J, comps):
    gtt, gtx, gxx = comps
    a, d = J[0, 0], J[1, 1]
    # J is diagonal for every identification here
    return a * a * gtt, a * d * gtx, d * d * gxx


def seam_compatibility(
    man: ManifoldSpec,
    m: MetricSpec,
    order: int = 0,
    n_samples: int = 101,
    h: float = SEAM_FD_STEP,
) -> list[SeamReport]:
    """Compare the metric with its deck pullback along each seam.

    order 0: G(p) - J^T G(deck p) J.  order 1: the same for the derivative
    across the seam, central differences with step h on each side.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    reports = []
    for seam in man.seams:
        s = np.linspace(seam.s_range[0], seam.s_range[1], n_samples)
        t, x = seam.near(s)
        J = seam.jacobian
        if order == 0:
            near = m.components(t, x)
            far = _pullback(J, m.components(*seam.deck(t, x)))
        else:
            et, ex = (1.0, 0.0) if seam.normal == "t" else (0.0, 1.0)
            plus = m.components(t + h * et, x + h * ex)
            minus = m.components(t - h * et, x - h * ex)
            near = [(a - b) / (2 * h) for a, b in zip(plus, minus)]
            fplus = _pullback(J, m.components(*seam.deck(t + h * et, x + h * ex)))
            fminus = _pullback(J, m.components(*seam.deck(t - h * et, x - h * ex)))
            far = [(a - b) / (2 * h) for a, b in zip(fplus, fminus)]
        delta = np.stack([np.broadcast_to(a - b, s.shape) for a, b in zip(near, far)], axis=1)
        order_idx = np.argsort(s, kind="stable")
        reports.append(SeamReport(seam.id, order, s[order_idx], delta[order_idx]))
    return reports


def vector_field_seam_check(man: ManifoldSpec, V: VectorField, n_samples: int = 101) -> list[SeamReport]:
    """Carry V from the far edge back across each seam and subtract V on the near edge."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    reports = []
    for seam in man.seams:
        s = np.linspace(seam.s_range[0], seam.s_range[1], n_samples)
        t, x = seam.near(s)
        vt_far, vx_far = V(*seam.deck(t, x))
        Jinv = np.linalg.inv(seam.jacobian)
        carried_t = Jinv[0, 0] * vt_far + Jinv[0, 1] * vx_far
        carried_x = Jinv[1, 0] * vt_far + Jinv[1, 1] * vx_far
        vt, vx = V(t, x)
        delta = np.stack([carried_t - vt, carried_x - vx], axis=1)
        reports.append(SeamReport(seam.id, 0, s, delta, kind="vector"))
    return reports


def attach_psi(theta: float) -> ChartPoint:
    """Attaching map from the disk's boundary circle to the compact Mobius boundary."""
    if not 0.0 <= theta < 2.0 * math.pi:
        raise ValueError("theta must lie in [0, 2 pi)")
    if theta <= math.pi:
        return ChartPoint(1.0, theta / math.pi)
    return ChartPoint(0.0, theta / math.pi - 1.0)
