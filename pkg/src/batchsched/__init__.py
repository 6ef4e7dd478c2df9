"""Sensor scheduling for minimum-variance batch state estimation.

Selects, per measurement time, which sensors of a linear dynamical system to
activate under per-time cardinality budgets, minimizing the log-determinant
of the batch estimation-error covariance with a near-optimal greedy
scheduler. Includes exhaustive certification of the approximation guarantee,
property fuzzers, and closed-form limits on the achievable error.
"""

from .analysis import (
    BoundInputs,
    FuzzReport,
    RatioCertificate,
    bound_inputs,
    brute_force_opt,
    certify_ratio,
    ellipsoid_log_volume,
    error_lower_bound,
    feasible_schedule_count,
    fuzz_monotonicity,
    fuzz_supermodularity,
    iter_feasible_schedules,
    min_sensors_for_error,
    worst_value,
)
from .errors import (
    BatchSchedError,
    BudgetOutOfRange,
    DimensionMismatch,
    EnumerationCapExceeded,
    GuaranteeViolated,
    InvalidArgument,
    NonIncreasingTimes,
    NotPositiveDefinite,
    OracleCapExceeded,
    PropertyViolated,
    SensorAlreadySelected,
)
from .model import (
    ModelKind,
    Schedule,
    Sensor,
    SystemModel,
    load_scenario,
    model_fingerprint,
    model_from_dict,
    model_to_dict,
    random_scenario,
    save_scenario,
    validate_model,
)
from .objective import (
    ObjectiveEvaluator,
    SensorInfoBlock,
    assemble_information,
    batch_error_trace,
    block_tridiag_logdet,
    build_evaluator,
    marginal_gain,
    objective_logdet,
)
from .prior import (
    BlockTridiagonal,
    IntervalPropagation,
    build_prior_information,
    dense_prior_covariance,
    discretize_interval,
)
from .scheduler import (
    GreedyOptions,
    GreedyTrace,
    TraceEntry,
    greedy_schedule,
    greedy_step,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSchedError",
    "BlockTridiagonal",
    "BoundInputs",
    "BudgetOutOfRange",
    "DimensionMismatch",
    "EnumerationCapExceeded",
    "FuzzReport",
    "GreedyOptions",
    "GreedyTrace",
    "GuaranteeViolated",
    "IntervalPropagation",
    "InvalidArgument",
    "ModelKind",
    "NonIncreasingTimes",
    "NotPositiveDefinite",
    "ObjectiveEvaluator",
    "OracleCapExceeded",
    "PropertyViolated",
    "RatioCertificate",
    "Schedule",
    "Sensor",
    "SensorAlreadySelected",
    "SensorInfoBlock",
    "SystemModel",
    "TraceEntry",
    "assemble_information",
    "batch_error_trace",
    "block_tridiag_logdet",
    "bound_inputs",
    "brute_force_opt",
    "build_evaluator",
    "build_prior_information",
    "certify_ratio",
    "dense_prior_covariance",
    "discretize_interval",
    "ellipsoid_log_volume",
    "error_lower_bound",
    "feasible_schedule_count",
    "fuzz_monotonicity",
    "fuzz_supermodularity",
    "greedy_schedule",
    "greedy_step",
    "iter_feasible_schedules",
    "load_scenario",
    "marginal_gain",
    "min_sensors_for_error",
    "model_fingerprint",
    "model_from_dict",
    "model_to_dict",
    "objective_logdet",
    "random_scenario",
    "save_scenario",
    "validate_model",
    "worst_value",
]
