"""Cross validation, grid search and penalty-level policies."""

from .cv import CVSelection, cv_select, fold_partition, pick_largest_minimizer, target_holdout_score
from .grid import (
    DEFAULT_FOLDS,
    Criterion,
    TuningGrid,
    default_grid,
    lambda_max,
    shifted_lambda_max,
)
from .policy import POLICY_VERSION, LambdaPolicy, apply_policy, policy_label
from .search import GridChoice, grid_select

__all__ = [
    "CVSelection",
    "Criterion",
    "DEFAULT_FOLDS",
    "GridChoice",
    "LambdaPolicy",
    "POLICY_VERSION",
    "TuningGrid",
    "apply_policy",
    "cv_select",
    "default_grid",
    "fold_partition",
    "grid_select",
    "lambda_max",
    "pick_largest_minimizer",
    "policy_label",
    "shifted_lambda_max",
    "target_holdout_score",
]
