"""Finite flexibility: generators, closed-form deformations, opposite ratios,
the class (i)/(ii) classifier and L-shaped extension."""
from .classify import Classification, classify, segment_parallelism
from .extend import ExtensionResult, WideLShapedNet, extend_L_shaped, face_ratio
from .families import DeformationFamily, DeformationReport, check_isometric_deformation, congruence_fit
from .generators import (
    ConeCylinderData,
    cone_cylinder_points,
    deform_cone_cylinder,
    deform_generalized_T,
    egg_crate_net,
    gen_cone_cylinder,
    gen_example_2x2,
    gen_generalized_T,
    lift_top_view,
    paraboloid_net,
    random_planar_net,
)
from .ratios import (
    EDGE_SLOT,
    is_affine_symmetric_pair,
    opposite_ratio,
    opposite_ratio_by_angles,
    quad_opposite_ratio,
    vertex_ratio_grid,
)
