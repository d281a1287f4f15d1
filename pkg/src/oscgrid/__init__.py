"""Toolkit for networks of two-dimensional coupled oscillators.

Builds weighted-graph network models of grid-forming AC inverters,
dispatches feasible power-flow set-points, certifies a synchronization
condition, and integrates the closed loop deterministically.
"""

from .analysis import (
    StabilityReport,
    TargetSetDistances,
    check_condition1,
    invariant_set_membership,
    jacobian_at_origin,
    lyapunov_V,
    projector_P,
    target_distances,
    w_k,
)
from .controller import (
    FieldContext,
    GainSet,
    PolarState,
    closed_loop_field,
    control_law,
    droop_field,
    kuramoto_field,
    magnitude_error,
    make_context,
    phase_error,
    phi,
    projected_field,
    rotating_frame_field,
)
from .errors import (
    AssumptionViolationError,
    ChartSingularError,
    DegenerateLineError,
    DisconnectedGraphError,
    DivergenceError,
    InfeasibleSetpointsError,
    InputError,
    OscgridError,
)
from .graph import Graph, build_incidence, build_laplacian, extend, lambda2
from .network import (
    Bases,
    LineParams,
    NetworkSpec,
    admittance_matrix,
    clarke,
    instantaneous_power,
    inverse_clarke,
    kappa,
    line_weight,
    local_output,
    network_laplacian,
)
from .setpoints import (
    K_from_angles,
    K_from_power,
    SetpointBundle,
    feasibility_residual,
    power_from_angles,
    solve_angles,
)
from .sim import Event, Scenario, Trajectory, case_study, integrate

__version__ = "1.0.0"

__all__ = [
    "AssumptionViolationError",
    "Bases",
    "ChartSingularError",
    "DegenerateLineError",
    "DisconnectedGraphError",
    "DivergenceError",
    "Event",
    "FieldContext",
    "GainSet",
    "Graph",
    "InfeasibleSetpointsError",
    "InputError",
    "K_from_angles",
    "K_from_power",
    "LineParams",
    "NetworkSpec",
    "OscgridError",
    "PolarState",
    "Scenario",
    "SetpointBundle",
    "StabilityReport",
    "TargetSetDistances",
    "Trajectory",
    "admittance_matrix",
    "build_incidence",
    "build_laplacian",
    "case_study",
    "check_condition1",
    "clarke",
    "closed_loop_field",
    "control_law",
    "droop_field",
    "extend",
    "feasibility_residual",
    "instantaneous_power",
    "integrate",
    "invariant_set_membership",
    "inverse_clarke",
    "jacobian_at_origin",
    "kappa",
    "kuramoto_field",
    "lambda2",
    "line_weight",
    "local_output",
    "lyapunov_V",
    "magnitude_error",
    "make_context",
    "network_laplacian",
    "phase_error",
    "phi",
    "power_from_angles",
    "projected_field",
    "projector_P",
    "rotating_frame_field",
    "solve_angles",
    "target_distances",
    "w_k",
]
