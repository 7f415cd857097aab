"""Grid sampling of the metric and CSV/JSON writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .causal import null_slopes_grid
from .geometry import TOL_DEG, MetricSpec, classify

FIELD_HEADER = ["t", "x", "g_tt", "g_tx", "g_xx", "det", "class_code", "slope1", "slope2"]


@dataclass
class FieldSample:
    """Metric samples on a grid_n x grid_n lattice, t along axis 0."""

    t: np.ndarray
    x: np.ndarray
    g_tt: np.ndarray
    g_tx: np.ndarray
    g_xx: np.ndarray
    det: np.ndarray
    codes: np.ndarray
    slope1: np.ndarray
    slope2: np.ndarray

    def rows(self):
        for idx in np.ndindex(self.t.shape):
            yield (
                float(self.t[idx]),
                float(self.x[idx]),
                float(self.g_tt[idx]),
                float(self.g_tx[idx]),
                float(self.g_xx[idx]),
                float(self.det[idx]),
                str(self.codes[idx]),
                float(self.slope1[idx]),
                float(self.slope2[idx]),
            )


def sample_field(m: MetricSpec, window, grid_n: int, tol_deg: float = TOL_DEG) -> FieldSample:
    tmin, tmax, xmin, xmax = window
    T, X = np.meshgrid(np.linspace(tmin, tmax, grid_n), np.linspace(xmin, xmax, grid_n), indexing="ij")
    gtt, gtx, gxx = (np.broadcast_to(np.asarray(c, float), T.shape) for c in m.components(T, X))
    det = gtt * gxx - gtx * gtx
    codes = classify(gtt, det, tol_deg)
    s1, s2 = null_slopes_grid(gtt, gtx, gxx, codes)
    return FieldSample(T, X, gtt, gtx, gxx, det, codes, s1, s2)


def _num(v: float) -> str:
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def field_csv(sample: FieldSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELD_HEADER)
    for row in sample.rows():
        w.writerow([_num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
