"""curveflow: exact simulation of linear nonlocal curvature flows of
convex plane curves via support-function spectra."""

from .diagnostics import (
    InequalityReport,
    build_report,
    convergence_residual,
    gage,
    go1,
    go2,
    ipd_decay_ratio,
    ipr_guaranteed_monotone,
    ipr_monotone,
    isoperimetric,
    limit_circle,
    reports_to_csv,
    summarize,
)
from .flows import (
    Constant,
    FlowState,
    HDomainError,
    LinTsai,
    MaCheng,
    NonlocalTerm,
    PanYang,
    PowerSum,
    area_along_flow,
    evaluate_h,
    flow_state,
    format_flow_term,
    length_rate,
    parse_flow_term,
)
from .heat import (
    DeviationSpectrum,
    deviation_of,
    deviation_sup_norm,
    e1,
    kernel_oracle,
    known_scalars,
    mode_factors,
    propagate,
    with_mean,
)
from .integrate import (
    AreaVanishesCurvatureBlowup,
    ConvergesToCircle,
    CurvatureSingularity,
    IntegratorControls,
    LengthBlowupRescaledCircle,
    LengthVanishesSingularityForced,
    Outcome,
    TerminationEvent,
    Trajectory,
    Undetermined,
    classify,
    describe_outcome,
    detect_singularity,
    integrate,
    rescaled_support,
    state_record,
    trajectory_lines,
    write_trajectory_jsonl,
)
from .support import (
    CONVEXITY_EPS,
    ConvexityError,
    CurveSamples,
    GeometricSummary,
    SupportSpectrum,
    curve_length,
    curve_position,
    curve_samples_to_csv,
    enclosed_area,
    evaluate_support,
    project_from_samples,
    radius_extrema,
    radius_of_curvature,
    spectrum_from_dict,
    spectrum_from_json,
    spectrum_from_polygon,
    spectrum_to_dict,
    spectrum_to_json,
    sq_curvature_integral,
    support_derivative,
    theta_grid,
    total_inverse_curvature,
    validate_convexity,
)

__version__ = "0.1.0"
