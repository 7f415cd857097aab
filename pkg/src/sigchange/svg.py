"""Hand-written SVG figures: x runs left to right, t runs bottom to top."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._contour import extract_zero_set
from .io import FieldSample


def _f(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "0"


@dataclass
class Figure:
    window: tuple[float, float, float, float]
    width: int = 640
    height: int = 640
    pad: int = 40
    items: list[str] = field(default_factory=list)

    def _px(self, t, x):
        tmin, tmax, xmin, xmax = self.window
        px = self.pad + (x - xmin) / (xmax - xmin) * (self.width - 2 * self.pad)
        py = self.height - self.pad - (t - tmin) / (tmax - tmin) * (self.height - 2 * self.pad)
        return px, py

    def rect(self, t0, t1, x0, x1, fill="#e8e8e8"):
        ax, ay = self._px(t1, x0)
        bx, by = self._px(t0, x1)
        self.items.append(f'<rect x="{_f(ax)}" y="{_f(ay)}" width="{_f(bx - ax)}" height="{_f(by - ay)}" fill="{fill}"/>')

    def line(self, p, q, stroke="#000", width=1.0, dash=None):
        (ax, ay), (bx, by) = self._px(*p), self._px(*q)
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<line x1="{_f(ax)}" y1="{_f(ay)}" x2="{_f(bx)}" y2="{_f(by)}" stroke="{stroke}" stroke-width="{width}"{d}/>'
        )

    def polyline(self, pts, stroke="#000", width=1.0, dash=None, closed=False):
        if len(pts) < 2:
            return
        coords = " ".join(f"{_f(a)},{_f(b)}" for a, b in (self._px(t, x) for t, x in pts))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        tag = "polygon" if closed else "polyline"
        self.items.append(f'<{tag} points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"{d}/>')

    def text(self, t, x, s, size=12):
        px, py = self._px(t, x)
        self.items.append(f'<text x="{_f(px)}" y="{_f(py)}" font-size="{size}" font-family="sans-serif">{s}</text>')

    def frame(self):
        tmin, tmax, xmin, xmax = self.window
        self.polyline([(tmin, xmin), (tmin, xmax), (tmax, xmax), (tmax, xmin)], stroke="#444", closed=True)
        self.text(tmin, xmax, "x", 14)
        self.text(tmax, xmin, "t", 14)

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.items, "</svg>"]) + "\n"


def _unit_null(gtt, gtx, gxx):
    """Two Euclidean-unit null directions (vt, vx) of a Lorentzian 2x2 matrix."""
    lam, Q = np.linalg.eigh(np.array([[gtt, gtx], [gtx, gxx]]))
    a = Q[:, 0] / math.sqrt(-lam[0])
    b = Q[:, 1] / math.sqrt(lam[1])
    out = []
    for n in (a + b, a - b):
        out.append(n / np.linalg.norm(n))
    return out


def field_figure(sample: FieldSample, window, metric=None, trajectories=(), locus_grid: int = 256) -> str:
    """Cone glyphs on Lorentzian samples, shaded g_tt < 0 cells, dashed loci and trajectories."""
    fig = Figure(tuple(window))
    n = sample.t.shape[0]
    tmin, tmax, xmin, xmax = window
    dt = (tmax - tmin) / max(n - 1, 1)
    dx = (xmax - xmin) / max(n - 1, 1)
    for idx in zip(*np.nonzero(sample.g_tt < 0)):
        t, x = sample.t[idx], sample.x[idx]
        fig.rect(max(t - dt / 2, tmin), min(t + dt / 2, tmax), max(x - dx / 2, xmin), min(x + dx / 2, xmax))
    # each null line is 0.4 grid cells long, centred on the sample
    for idx in zip(*np.nonzero(sample.codes == "L")):
        t, x = float(sample.t[idx]), float(sample.x[idx])
        for vt, vx in _unit_null(sample.g_tt[idx], sample.g_tx[idx], sample.g_xx[idx]):
            ht, hx = 0.2 * dt * vt, 0.2 * dx * vx
            fig.line((t - ht, x - hx), (t + ht, x + hx), stroke="#1f4e9a", width=0.8)
    if metric is not None:
        for pl in extract_zero_set(metric.det, window, locus_grid):
            fig.polyline(pl.points, stroke="#c0392b", width=1.5, dash="6,4", closed=pl.closed)

        def g_tt(t, x):
            return np.broadcast_to(metric.components(t, x)[0], np.shape(t))

        for pl in extract_zero_set(g_tt, window, locus_grid):
            fig.polyline(pl.points, stroke="#555", width=1.0, dash="2,3", closed=pl.closed)
    for traj in trajectories:
        fig.polyline(traj, stroke="#d35400", width=1.8)
    fig.frame()
    return fig.render()
