"""Radial-symmetry laboratory for singular metrics of nonnegative scalar
curvature: curvature operators, model cone metrics, mollification, a
DeTurck-modified Ricci flow with quantitative monitors, mass evaluation and
conformally invariant checks."""
from __future__ import annotations

from .errors import (
    CflError,
    ConelabError,
    ConstructionError,
    DomainError,
    FlowBreakdownError,
    GridMismatchError,
    PreconditionError,
    ResolutionError,
)
from .grid import RadialGrid, RadialProfile, Region
from .tensors import Background, SymTensor2Radial, diag_tensor
from .geometry import (
    Christoffels,
    ConformalMetric,
    RiemannInvariant,
    WarpedMetric,
    curvature_assembly,
    laplacian_radial,
    linearized_scalar,
    mean_curvature_sphere,
    resample_metric,
    scalar_curvature_conformal,
    scalar_curvature_from_warp_factor,
    scalar_curvature_warped,
    sobolev_norms,
    sphere_area,
    tensor_trace,
    traceless_ricci,
    unit_sphere_volume,
    volume,
    volume_density,
)
from .examples import (
    ConeSpec,
    CornerMetric,
    GluedSchwarzschild,
    PositiveMassCone,
    ZeroAreaMetric,
    fit_area_exponent,
    fit_cone_angle,
    make_capped_cone,
    make_cone,
    make_cone_ball_gluing,
    make_glued_schwarzschild,
    make_positive_mass_cone,
    make_zero_area_singularity,
)
from .mollify import (
    Cutoff,
    MollifierSpec,
    make_cutoff,
    mollify_conepoint,
    mollify_metric,
    mollify_variable,
    smooth_corner,
)
from .hflow import (
    FlowConfig,
    FlowState,
    FlowTrace,
    MonitorReport,
    closeness_ratio,
    deturck_field,
    hflow_rhs,
    integrate_diffeo,
    monitor_estimates,
    pullback_metric,
    run_hflow,
    step_flow,
)
from .mass import (
    AfReport,
    MassDriftSeries,
    MassReport,
    ScalarDecaySeries,
    adm_mass,
    mass_drift,
    monitor_scalar_decay,
    verify_af_decay,
)
from .yamabe import (
    PeriodicProfile,
    TorusMetric,
    YamabeSolution,
    linearized_scalar_periodic,
    lq_bound_check,
    perturb_traceless,
    solve_yamabe,
)
from .verify import CLAIM_NAMES, ClaimVerdict, run_claims

__version__ = "0.1.0"
