"""Tuning grids, held-out criteria and the lambda_max helper."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from tlmest.common.errors import ConfigError, InvalidInputError
from tlmest.common.schema import check_keys
from tlmest.core import Dataset, LossFamily, Parameter, Regularizer, WeightedObjective

DEFAULT_FOLDS = 5
DEFAULT_GRID_SIZE = 50
DEFAULT_GRID_RATIO = 1e-3


class Criterion(str, Enum):
    PREDICTION_ERROR = "prediction_error"
    DEVIANCE = "deviance"

    @classmethod
    def default_for(cls, family: LossFamily) -> "Criterion":
        if family is LossFamily.LOGISTIC_LOGIT:
            return cls.DEVIANCE
        return cls.PREDICTION_ERROR

    def score(self, d: Dataset, theta: Union[Parameter, np.ndarray]) -> float:
        """Mean held-out criterion of theta on d."""
        eta = d.linear_predictor(theta)
        if self is Criterion.PREDICTION_ERROR:
            return float(np.mean((d.responses - d.family.mean(eta)) ** 2))
        # deviance against the saturated model, whose loss is 0 for both families
        # once the squared cumulant's y^2/2 term is restored
        terms = -d.responses * eta + d.family.cumulant(eta)
        if d.family is LossFamily.SQUARED_IDENTITY:
            terms = terms + 0.5 * d.responses**2
        return float(2.0 * np.mean(terms))


@dataclass(frozen=True)
class TuningGrid:
    """
    Args:
        values: strictly increasing positive penalty levels
        folds: number of cross-validation folds
        criterion: held-out score, chosen from the family when omitted
    """

    values: Sequence[float]
    folds: int = DEFAULT_FOLDS
    criterion: Optional[Criterion] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise InvalidInputError("tuning grid is empty")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidInputError("tuning grid values must be finite and positive")
        if np.any(np.diff(values) <= 0):
            raise InvalidInputError("tuning grid values must be strictly increasing")
        if int(self.folds) != self.folds or self.folds < 2:
            raise InvalidInputError(f"folds must be an integer >= 2, got {self.folds}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "folds", int(self.folds))
        if self.criterion is not None:
            object.__setattr__(self, "criterion", Criterion(self.criterion))

    def criterion_for(self, family: LossFamily) -> Criterion:
        return self.criterion or Criterion.default_for(family)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TuningGrid":
        check_keys(cls, data, "tuning")
        try:
            return cls(**dict(data))
        except (InvalidInputError, ValueError) as e:
            raise ConfigError(f"tuning: {e}") from e


def lambda_max(datasets: Sequence[Dataset], r: Regularizer) -> float:
    """Smallest lambda at which the pooled penalized fit is exactly zero."""
    objective = WeightedObjective.pooled(datasets)
    grad = objective.gradient(np.zeros(objective.dim)).reshape(objective.param_shape)
    return r.dual_norm(grad)


def shifted_lambda_max(target: Dataset, shift: Parameter, r: Regularizer) -> float:
    """Smallest zeta at which fine-tuning around ``shift`` returns delta = 0."""
    objective = WeightedObjective.single(target, shift=shift)
    grad = objective.gradient(np.zeros(objective.dim)).reshape(objective.param_shape)
    return r.dual_norm(grad)


def default_grid(
    lam_max: float, num: int = DEFAULT_GRID_SIZE, ratio: float = DEFAULT_GRID_RATIO
) -> np.ndarray:
    """``num`` log-spaced values from ratio * lam_max up to lam_max."""
    if not np.isfinite(lam_max) or lam_max <= 0:
        raise InvalidInputError(f"lambda_max must be positive, got {lam_max}")
    if num < 1 or not (0 < ratio <= 1):
        raise InvalidInputError(f"bad grid request num={num} ratio={ratio}")
    if num == 1:
        return np.array([float(lam_max)])
    return np.geomspace(lam_max * ratio, lam_max, num)
