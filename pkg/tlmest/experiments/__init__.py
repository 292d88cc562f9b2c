"""Metrics, the replication engine and the named simulation presets."""

from .estimators import (
    Estimate,
    EstimationContext,
    EstimatorRegistry,
    EstimatorSettings,
    registry as estimator_registry,
    run_estimators,
)
from .metrics import ErrorRecord, error_metrics, rate_slope, tpr_tnr
from .records import (
    RESULT_COLUMNS,
    ExperimentResult,
    aggregate,
    primary_error,
    read_records,
    records_frame,
)
from .registry import PresetRegistry, initialize_presets, registry as preset_registry
from .runner import ReplicationTask, run_replication, run_replications
from .sweep import (
    HSweepResult,
    RateResult,
    best_estimator_frequencies,
    default_h_grid,
    h_sweep,
    rate_study,
)

__all__ = [
    "RESULT_COLUMNS",
    "ErrorRecord",
    "Estimate",
    "EstimationContext",
    "EstimatorRegistry",
    "EstimatorSettings",
    "ExperimentResult",
    "HSweepResult",
    "PresetRegistry",
    "RateResult",
    "ReplicationTask",
    "aggregate",
    "best_estimator_frequencies",
    "default_h_grid",
    "error_metrics",
    "estimator_registry",
    "h_sweep",
    "initialize_presets",
    "preset_registry",
    "primary_error",
    "rate_slope",
    "rate_study",
    "read_records",
    "records_frame",
    "run_estimators",
    "run_replication",
    "run_replications",
    "tpr_tnr",
]
