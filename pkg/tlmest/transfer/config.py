"""Configuration of the pool-then-fine-tune procedure."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional

import numpy as np

from tlmest.common.errors import ConfigError
from tlmest.common.schema import check_keys
from tlmest.core import Regularizer
from tlmest.solvers import SolverOptions


class FineTuneKind(str, Enum):
    LAGRANGIAN = "lagrangian"
    CONSTRAINED = "constrained"
    CROSS_VALIDATED = "cv"
    NONE = "none"


@dataclass(frozen=True)
class FineTune:
    """Second-step variant; ``value`` is zeta_d (Lagrangian) or r_d (constrained)."""

    kind: FineTuneKind = FineTuneKind.CROSS_VALIDATED
    value: Optional[float] = None

    def __post_init__(self) -> None:
        try:
            kind = FineTuneKind(self.kind)
        except ValueError as e:
            raise ConfigError(f"unknown fine-tuning kind {self.kind!r}") from e
        object.__setattr__(self, "kind", kind)
        if kind in (FineTuneKind.LAGRANGIAN, FineTuneKind.CONSTRAINED):
            if self.value is None:
                raise ConfigError(f"fine-tuning '{kind.value}' needs a value")
            value = float(self.value)
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"fine-tuning value must be finite and >= 0, got {value}")
            object.__setattr__(self, "value", value)

    @classmethod
    def none(cls) -> "FineTune":
        return cls(FineTuneKind.NONE)

    @classmethod
    def lagrangian(cls, zeta: float) -> "FineTune":
        return cls(FineTuneKind.LAGRANGIAN, zeta)

    @classmethod
    def constrained(cls, radius: float) -> "FineTune":
        return cls(FineTuneKind.CONSTRAINED, radius)

    @classmethod
    def cross_validated(cls) -> "FineTune":
        return cls(FineTuneKind.CROSS_VALIDATED)


@dataclass(frozen=True)
class TransferConfig:
    lambda_pool: float
    finetune: FineTune = field(default_factory=FineTune)
    regularizer: Regularizer = field(default_factory=Regularizer.l1)
    solver: SolverOptions = field(default_factory=SolverOptions)
    cv_folds: int = 5
    cv_grid_size: int = 20
    cv_seed: int = 0

    def __post_init__(self) -> None:
        lam = float(self.lambda_pool)
        if not np.isfinite(lam) or lam < 0:
            raise ConfigError(f"lambda_pool must be finite and >= 0, got {self.lambda_pool}")
        object.__setattr__(self, "lambda_pool", lam)
        object.__setattr__(self, "regularizer", Regularizer.parse(self.regularizer))
        if self.cv_folds < 2 or self.cv_grid_size < 1:
            raise ConfigError("cv_folds must be >= 2 and cv_grid_size >= 1")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TransferConfig":
        check_keys(cls, data, "transfer")
        values: Dict[str, Any] = dict(data)
        finetune = values.get("finetune")
        if isinstance(finetune, str):
            values["finetune"] = FineTune(finetune)
        elif isinstance(finetune, Mapping):
            check_keys(FineTune, finetune, "transfer.finetune")
            values["finetune"] = FineTune(**finetune)
        if isinstance(values.get("solver"), Mapping):
            values["solver"] = SolverOptions.from_dict(values["solver"])
        if "lambda_pool" not in values:
            raise ConfigError("transfer.lambda_pool is required")
        try:
            return cls(**values)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"transfer: {e}") from e
