"""Level-set bodies, projection bodies and spherical surface measures of
weighted piecewise-affine convex functions, with a verification harness for
their structural laws."""

from .geometry import (
    DiscreteSphericalMeasure,
    GeometryError,
    Polytope,
    SupportBody,
    UnimodularMap,
    convex_hull,
    cosine_transform,
    difference_body,
    hausdorff_distance,
    linear_image,
    minkowski_sum,
    moment_body,
    moment_body_support,
    moment_vector,
    projection_body,
    reflect,
    subspace_projection,
    support,
    surface_area_measure,
    translate,
    volume,
)
from .convexfn import (
    CertifiedMin,
    LatticePair,
    PiecewiseAffineConvexFunction,
    act_add_constant,
    act_linear,
    act_translate,
    clip_polytope,
    cone_function,
    indicator,
    outer_polytope,
    pointwise_max,
    pointwise_min_certified,
    reflect_arg,
    sublevel_hausdorff_profile,
)
from .weights import WeightFunction
from .bodies import (
    FunctionVanishesError,
    LyzMeasure,
    QuadratureConfig,
    QuadratureToleranceError,
    difference_level_set_body,
    direction_set,
    functional_projection_body,
    functional_volume,
    level_set_body,
    lyz_measure,
    projection_interpretation,
    radial_identity_check,
)

__version__ = "0.1.0"
