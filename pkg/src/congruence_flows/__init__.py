"""Oriented line congruences and Euler flows with straight streamlines."""
from .congruence import (
    CongruenceSpec,
    SpinData,
    beta,
    cylinder_congruence,
    focal_points,
    rank_at,
    shear_identity_sides,
    sphere_congruence,
    spin_coefficients,
)
from .errors import (
    CaseMismatch,
    ChartError,
    CongruenceFlowError,
    DegenerateJacobian,
    DegenerateParameterization,
    FocalSingularity,
    IllConditioned,
    LocateError,
    SingularityTooClose,
    SourceSingularity,
    SpecError,
)
from .flows import (
    FlowField,
    TimeSignal,
    canonical_cylinder_flow,
    canonical_plane_flow,
    canonical_sphere_flow,
    divfree_rank0,
    divfree_rank1,
    divfree_rank2,
)
from .geometry import OrientedLine, line_through, line_to_point, phi
from .obstruction import ClassificationVerdict, classify, r_poly_coeffs
from .polynomials import BiPoly, CurvePoly, SheetPoly
from .verify import FDConfig, euclidean_divergence, euler_residual, verify_flow

__version__ = "0.1.0"

__all__ = [
    "BiPoly",
    "CaseMismatch",
    "ChartError",
    "ClassificationVerdict",
    "CongruenceFlowError",
    "CongruenceSpec",
    "CurvePoly",
    "DegenerateJacobian",
    "DegenerateParameterization",
    "FDConfig",
    "FlowField",
    "FocalSingularity",
    "IllConditioned",
    "LocateError",
    "OrientedLine",
    "SheetPoly",
    "SingularityTooClose",
    "SourceSingularity",
    "SpecError",
    "SpinData",
    "TimeSignal",
    "beta",
    "canonical_cylinder_flow",
    "canonical_plane_flow",
    "canonical_sphere_flow",
    "classify",
    "cylinder_congruence",
    "divfree_rank0",
    "divfree_rank1",
    "divfree_rank2",
    "euclidean_divergence",
    "euler_residual",
    "focal_points",
    "line_through",
    "line_to_point",
    "phi",
    "r_poly_coeffs",
    "rank_at",
    "shear_identity_sides",
    "sphere_congruence",
    "spin_coefficients",
    "verify_flow",
]
