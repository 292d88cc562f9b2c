"""Oracle transfer: weighted pooling then fine-tuning on the target."""

from .config import FineTune, FineTuneKind, TransferConfig
from .finetune import (
    FineTuneResult,
    fine_tune_constrained,
    fine_tune_cv,
    fine_tune_lagrangian,
)
from .oracle import TransferFit, fine_tune, oracle_transfer, pooled_estimate, pooled_fit

__all__ = [
    "FineTune",
    "FineTuneKind",
    "FineTuneResult",
    "TransferConfig",
    "TransferFit",
    "fine_tune",
    "fine_tune_constrained",
    "fine_tune_cv",
    "fine_tune_lagrangian",
    "oracle_transfer",
    "pooled_estimate",
    "pooled_fit",
]
