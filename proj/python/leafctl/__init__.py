"""Closed-loop infill-density control for sequentially printed leaf springs."""

from ._core import (
    BeliefState,
    BuildPlan,
    ControlDecision,
    LeafctlError,
    Observation,
    ProcessModel,
    SessionStore,
    StrategyKind,
    allocate_equal_split,
    calibrate_csv,
    effective_obs_variance,
    monte_carlo,
    open_loop_density,
    optimal_density,
    posterior_oracle,
    predict_final,
    replay,
    steady_state_variance,
    stiffness_from_bending,
    update,
    validate,
    variance_sequence,
)

REFERENCE_MODEL = ProcessModel(alpha=0.3073, beta=4.5593, sigma_p=1.0579, sigma_o=0.6907)

__all__ = [
    "BeliefState",
    "BuildPlan",
    "ControlDecision",
    "LeafctlError",
    "Observation",
    "ProcessModel",
    "REFERENCE_MODEL",
    "SessionStore",
    "StrategyKind",
    "allocate_equal_split",
    "calibrate_csv",
    "effective_obs_variance",
    "monte_carlo",
    "open_loop_density",
    "optimal_density",
    "posterior_oracle",
    "predict_final",
    "replay",
    "steady_state_variance",
    "stiffness_from_bending",
    "update",
    "validate",
    "variance_sequence",
]
