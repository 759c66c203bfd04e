"""Viscous planar flow outside a thin obstacle collapsing to a slit.

The package builds the exterior conformal geometry, assembles the
closed-form starting velocity (vortical part plus circulation carrier),
marches the vorticity with a mapped-grid finite-difference scheme, and
measures the collapse of the flow family toward its slit limit.
"""

from ._backend import active_backend, use
from .conformal import (
    ExteriorMap,
    FamilyCheckReport,
    FamilyCheckRow,
    ObstacleFamily,
    check_shrinking_family,
    invariant_report,
    one_sided_trace,
    segment_distance,
)
from .errors import (
    BlowupError,
    BranchCutError,
    CflError,
    ConfigError,
    DomainError,
    EndpointError,
    QuadratureError,
    SupportError,
    ThinflowError,
)
from .fields import (
    BumpVorticity,
    CutoffProfile,
    FlowData,
    VorticityBump,
    background_field,
    circulation,
    harmonic_field,
    induced_velocity,
    initial_velocity,
    jump_density,
    limit_velocity,
    sheet_total,
    shifted_initial_data,
    velocity_sampler,
)
from .solver import (
    RunRecord,
    SolverConfig,
    StreamTestField,
    build_grid,
    envelope_margin,
    load_checkpoint,
    run_simulation,
    save_checkpoint,
    suggest_dt,
)
from .studies import (
    ConvergenceReport,
    ProbePatch,
    StudyConfig,
    decay_fit,
    endpoint_fit,
    flow_convergence,
    initial_data_convergence,
    l2_patch_norm,
    lp_uniform_bound,
    reference_flow,
    report_emit,
    report_load,
    run_full_study,
    uniqueness_probe,
)

__version__ = "0.1.0"

__all__ = [
    "ExteriorMap",
    "ObstacleFamily",
    "FamilyCheckRow",
    "FamilyCheckReport",
    "check_shrinking_family",
    "invariant_report",
    "one_sided_trace",
    "segment_distance",
    "ThinflowError",
    "BranchCutError",
    "DomainError",
    "EndpointError",
    "SupportError",
    "QuadratureError",
    "ConfigError",
    "CflError",
    "BlowupError",
    "VorticityBump",
    "BumpVorticity",
    "FlowData",
    "CutoffProfile",
    "harmonic_field",
    "induced_velocity",
    "initial_velocity",
    "limit_velocity",
    "background_field",
    "shifted_initial_data",
    "velocity_sampler",
    "jump_density",
    "sheet_total",
    "circulation",
    "SolverConfig",
    "RunRecord",
    "StreamTestField",
    "build_grid",
    "suggest_dt",
    "run_simulation",
    "envelope_margin",
    "save_checkpoint",
    "load_checkpoint",
    "ProbePatch",
    "StudyConfig",
    "ConvergenceReport",
    "l2_patch_norm",
    "decay_fit",
    "endpoint_fit",
    "initial_data_convergence",
    "lp_uniform_bound",
    "flow_convergence",
    "uniqueness_probe",
    "reference_flow",
    "run_full_study",
    "report_emit",
    "report_load",
    "active_backend",
    "use",
    "__version__",
]
