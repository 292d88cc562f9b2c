"""Source selection through the truncated contrast penalty."""

from .config import SelectionConfig
from .dc import SelectionFit, run_dc
from .init import initial_state, per_dataset_fits
from .objective import TruncatedObjective, identify_informative
from .pipeline import select, select_and_transfer
from .sparse import artificial_observations, dc_truncated_sparse
from .state import SelectionState
from .trace import dc_truncated_trace

__all__ = [
    "SelectionConfig",
    "SelectionFit",
    "SelectionState",
    "TruncatedObjective",
    "artificial_observations",
    "dc_truncated_sparse",
    "dc_truncated_trace",
    "identify_informative",
    "initial_state",
    "per_dataset_fits",
    "run_dc",
    "select",
    "select_and_transfer",
]
