"""Flexible quad nets in isotropic 3-space."""
from .core import (
    DEFAULT_TOL,
    InfinitesimalCongruence,
    IsotropicCongruence,
    NonIsotropicPlane,
    Point3,
    TopView2,
    apply_congruence,
    compose,
    dual_plane_to_point,
    dual_point_to_plane,
    field_at,
    iso_angle,
    iso_distance,
    plane_through,
    replacing_distance,
    top_view,
)
from .errors import *  # noqa: F401,F403
from .quadnet import (
    QuadNet,
    ValidationReport,
    are_combescure,
    are_v_parallel,
    curvature,
    curvature_grid,
    face_duals,
    is_dual_convex,
    metric_dual_net,
    mixed_area,
    mixed_curvature,
    net_from_dual,
    validate,
)
from .koenigs import (
    christoffel_dual_net,
    height_grid,
    is_koenigs,
    motion_space,
    reciprocal_parallel,
    velocity_diagram,
)

__version__ = "0.1.0"
