"""Two-dimensional metrics whose signature changes across a curve."""

from .causal import (
    CausalKind,
    StripeId,
    TrappingReport,
    killing_character,
    null_slopes,
    sample_causal_direction,
    timelike_direction,
    trapping_experiment,
)
from .config import ConfigError, RunConfig
from .dynamics import (
    GeodesicStatus,
    GeodesicTrace,
    christoffel_closed_rotating,
    christoffel_numeric,
    integrate_geodesic,
    integrate_geodesics,
    scalar_curvature,
)
from .expr import ExprError, ScalarField
from .geometry import (
    ChartPoint,
    CrosscapQuadratic,
    CustomMetric,
    FlatMinkowski,
    GeometryError,
    MetricSpec,
    RotatingMinkowski,
    Signature,
    TangentVector,
    TransformedMetric,
    VectorField,
    Window,
    classify,
    eval_metric,
    rotating_metric,
)
from .prescription import (
    condition_checks,
    degeneracy_locus,
    radical_at,
    radical_classification,
    transform_metric,
)
from .quotient import ManifoldSpec, OutsideDomainError, Topology, canonicalize, seam_compatibility

__version__ = "0.1.0"
