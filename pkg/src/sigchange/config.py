"""Run configuration: defaults, a flat key=value file format, and metric construction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .expr import ExprError, ScalarField
from .geometry import (
    CrosscapQuadratic,
    CustomMetric,
    FlatMinkowski,
    MetricSpec,
    TransformedMetric,
    VectorField,
    Window,
    rotating_metric,
)
from .quotient import ManifoldSpec

MODELS = ("flat", "rotating", "crosscap", "transformed", "custom")
TOPOLOGIES = ("plane", "mobius-inf", "mobius-compact", "rp2")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: str = "rotating"
    base: str = "rotating"  # base metric of the transformed model
    angle_rate: float = math.pi
    f: str = "t^2 + x^2"
    V: str = "cos(pi*x),-sin(pi*x)"
    g: str = ""  # custom model components "g_tt,g_tx,g_xx"
    topology: str = "plane"
    window: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    grid_n: int = 41
    seed: int = 0
    out: str = ""
    svg: str = ""
    tol_deg: float = 1e-9
    tol_tangent: float = 1e-6
    tol_grad: float = 1e-8
    dlam: float = 1e-3
    lam_max: float = 10.0
    init: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 0.0)
    n_curves: int = 200
    k: int = 0
    order: int = 0
    n_samples: int = 101
    extras: dict = field(default_factory=dict, compare=False)

    def validate(self) -> "RunConfig":
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.base not in ("flat", "rotating", "crosscap"):
            raise ConfigError(f"unknown base metric {self.base!r}")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}; choose from {', '.join(TOPOLOGIES)}")
        for name in ("tol_deg", "tol_tangent", "tol_grad", "dlam"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.grid_n < 8:
            raise ConfigError("grid_n must be at least 8")
        tmin, tmax, xmin, xmax = self.window
        if not (tmin < tmax and xmin < xmax):
            raise ConfigError(f"window {self.window} is degenerate")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.order not in (0, 1):
            raise ConfigError("order must be 0 or 1")
        return self

    @property
    def win(self) -> Window:
        return Window(*self.window)

    def manifold(self) -> ManifoldSpec:
        return ManifoldSpec.of(self.topology)

    def vector_field(self) -> VectorField:
        parts = self.V.split(",")
        if len(parts) != 2:
            raise ConfigError(f"V must be two comma-separated expressions, got {self.V!r}")
        try:
            return VectorField.parse(parts[0].strip(), parts[1].strip(), name="V")
        except ExprError as exc:
            raise ConfigError(f"bad V expression: {exc}") from exc

    def scalar_f(self) -> ScalarField:
        try:
            return ScalarField.parse(self.f, name="f")
        except ExprError as exc:
            raise ConfigError(f"bad f expression: {exc}") from exc

    def metric(self) -> MetricSpec:
        return build_metric(self)


def _base(name: str, angle_rate: float) -> MetricSpec:
    if name == "flat":
        return FlatMinkowski()
    if name == "crosscap":
        return CrosscapQuadratic()
    return rotating_metric(angle_rate)


def build_metric(cfg: RunConfig) -> MetricSpec:
    if cfg.model in ("flat", "rotating", "crosscap"):
        return _base(cfg.model, cfg.angle_rate)
    if cfg.model == "transformed":
        return TransformedMetric(_base(cfg.base, cfg.angle_rate), cfg.scalar_f(), cfg.vector_field())
    parts = [p.strip() for p in cfg.g.split(",")]
    if len(parts) != 3:
        raise ConfigError("custom model needs g = 'g_tt,g_tx,g_xx'")
    try:
        return CustomMetric(*(ScalarField.parse(p) for p in parts))
    except ExprError as exc:
        raise ConfigError(f"bad metric component: {exc}") from exc


def _floats(text: str, n: int, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"{name} must be {n} comma-separated numbers") from exc
    if len(vals) != n:
        raise ConfigError(f"{name} must be {n} comma-separated numbers")
    return vals


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, value) -> object:
    """Convert a textual value for ``key`` to the field's type."""
    key = key.replace("-", "_")
    if key == "grid":
        key = "grid_n"
    if key not in _FIELD_TYPES or key == "extras":
        raise ConfigError(f"unknown configuration key {key!r}")
    kind = _FIELD_TYPES[key]
    if not isinstance(value, str):
        return key, value
    try:
        if kind == "int":
            return key, int(value)
        if kind == "float":
            return key, float(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    if key in ("window", "init"):
        return key, _floats(value, 4, key)
    return key, value


def read_config_file(path: str | Path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        k, v = coerce(key, value)
        out[k] = v
    return out


def merge(base: RunConfig, *layers: dict) -> RunConfig:
    """Later layers win; None values are ignored."""
    cfg = base
    for layer in layers:
        updates = {}
        for key, value in layer.items():
            if value is None:
                continue
            k, v = coerce(key, value)
            updates[k] = v
        cfg = replace(cfg, **updates)
    return cfg.validate()
