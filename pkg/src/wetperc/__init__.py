"""Spanning-connectivity simulator and analytics for RF-charged device networks."""

__version__ = "0.1.0"

from .geometry import (
    GridIndex,
    ParameterError,
    Point,
    PointSet,
    Region,
    build_grid_index,
    neighbors_within,
    pairs_within,
    sample_ppp,
)
from .graph import (
    DisjointSet,
    IncrementalRgg,
    IncrementalWcRgg,
    SpanningRule,
    WcRgg,
    activate_devices,
    build_edges,
    build_wc_rgg,
    connected_components,
    incremental_activate,
    spans,
    write_debug_dump,
)
from .analytics import (
    LAMBDA_C_UNIT,
    BoundsReport,
    CapexReport,
    NetworkParams,
    approx_gilbert,
    approx_inner_city,
    approx_star,
    bounds_report,
    capex_report,
    effective_active_density,
    full_coverage_density,
    g_functions,
    inner_envelope_area,
    lambda_c_unit,
    lower_bound_density,
    outer_envelope_area,
    upper_bound_density,
)
from .hexlattice import (
    FaceClassification,
    HexLattice,
    adjacent_connectivity_check,
    classify_subcritical,
    classify_supercritical,
    face_percolation,
    face_probability_check,
    locate_face,
)
from .montecarlo import (
    CensoringError,
    EstimateResult,
    SimConfig,
    ThetaCurve,
    critical_density_realization,
    dense_es_critical,
    estimate_critical_density,
    percolation_probability,
    substream,
    sweep_lambda_r,
    sweep_r_f,
    theta_curve,
)
