"""horoflow: horosphere geometry and volume-preserving flows in model Hadamard spaces.

The package constructs Busemann fields on Euclidean space and real
hyperbolic half-space, the volume-preserving point-transport map built from
their normal flows, the difference/sum pair flows, and the
horosphere-intersection loci with their weighted volume integrals - and
verifies every closed form against independent numerical oracles.
"""

from .manifold import (
    EUCLIDEAN,
    HYPERBOLIC,
    BoundaryConfigError,
    BoundaryPoint,
    ChartDomainError,
    GeometryError,
    Isometry,
    ModelMismatchError,
    ModelSpace,
    Point,
    TangentVec,
    boundary_direction,
    boundary_finite,
    boundary_from_direction,
    boundary_infinity,
    direction_to_boundary,
    distance,
    exp_map,
    geodesic,
    log_map,
    metric_inner,
    normalize_pair,
    volume_density,
)
from .numerics import (
    ConvergenceError,
    MCEstimate,
    QuadratureRule,
    TestFunction,
    fd_gradient,
    fd_hessian,
    fd_jacobian,
    gauss_legendre,
    integrate_region,
    mc_integrate_box,
    ode_integrate,
    periodic_trapezoid,
    sphere_rule,
    unit_sphere_area,
)
from .busemann import (
    BusemannField,
    HessianOperator,
    beta,
    busemann_grad,
    busemann_hessian,
    busemann_value,
    busemann_value_truncated,
    coarea_slice_integral,
    estimate_h,
    horosphere_sphere,
    mean_curvature_h,
    sublevel_bounded_probe,
)
from .transport import (
    AlphaMap,
    NormalFlow,
    PairFlow,
    SingularFlowError,
    VolumePreservingMap,
    div_identity_difference,
    div_identity_sum,
    divergence_fd,
    flow_density,
    flow_density_fd,
    form_pullback_gap,
    gradient_pushforward_gap,
    horosphere_jacobian,
    map_f,
    normal_flow,
    pair_flow_step,
    pair_flow_trajectory,
    raw_pair_field,
)
from .locus import (
    EmptyLocusError,
    IntersectionLocus,
    PairConfig,
    VisibilityError,
    beta_bound_check,
    dw_ds_check,
    integral_v,
    integral_w,
    make_pair_config,
    parametrize_locus,
    strip_volume,
    strip_volume_mc,
    volume_locus,
    volume_upper_bound,
)

__version__ = "0.1.0"
