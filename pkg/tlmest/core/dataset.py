"""One study's covariates, responses, weight and loss family."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from tlmest.common.errors import InvalidInputError, ShapeMismatchError

from .family import LossFamily
from .parameter import Parameter


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observations (X_i, y_i), i = 1..n, sharing one covariate shape.

    ``covariates`` has shape (n, p) for vector models or (n, d1, d2) for trace models.
    ``weight`` is alpha_k in the pooled objective and defaults to 1.
    """

    covariates: np.ndarray
    responses: np.ndarray
    weight: float = 1.0
    family: LossFamily = LossFamily.SQUARED_IDENTITY
    design: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        x = np.array(self.covariates, dtype=np.float64, copy=True)
        y = np.array(self.responses, dtype=np.float64, copy=True).reshape(-1)
        family = LossFamily.parse(self.family)
        if x.ndim not in (2, 3):
            raise InvalidInputError(
                f"covariates must be (n, p) or (n, d1, d2), got shape {x.shape}"
            )
        n = x.shape[0]
        if n < 1:
            raise InvalidInputError("a dataset needs at least one observation")
        if y.shape[0] != n:
            raise ShapeMismatchError(f"{n} covariate rows but {y.shape[0]} responses")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidInputError("dataset contains non-finite values")
        weight = float(self.weight)
        if not np.isfinite(weight) or weight < 0:
            raise InvalidInputError(f"weight must be finite and >= 0, got {self.weight}")
        if family is LossFamily.LOGISTIC_LOGIT and not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidInputError("logit responses must be 0 or 1")
        object.__setattr__(self, "covariates", _readonly(x))
        object.__setattr__(self, "responses", _readonly(y))
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "design", _readonly(x.reshape(n, -1)))

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def param_shape(self) -> Tuple[int, ...]:
        return self.covariates.shape[1:]

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    @property
    def is_matrix(self) -> bool:
        return self.covariates.ndim == 3

    def check_parameter(self, theta: Union[Parameter, np.ndarray]) -> np.ndarray:
        """Return theta flattened, after checking it matches the covariate shape."""
        values = theta.values if isinstance(theta, Parameter) else np.asarray(theta, float)
        if values.shape != self.param_shape:
            raise ShapeMismatchError(
                f"parameter shape {values.shape} does not match covariates {self.param_shape}"
            )
        return values.reshape(-1)

    def linear_predictor(self, theta: Union[Parameter, np.ndarray]) -> np.ndarray:
        """eta_i = <theta, X_i> under the Frobenius pairing."""
        return self.design @ self.check_parameter(theta)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.covariates[idx], self.responses[idx], self.weight, self.family)

    def with_weight(self, weight: float) -> "Dataset":
        return Dataset(self.covariates, self.responses, weight, self.family)

    def __repr__(self) -> str:
        return (
            f"Dataset(n={self.n}, shape={self.param_shape}, "
            f"family={self.family.value}, weight={self.weight})"
        )


def check_compatible(datasets: Sequence[Dataset]) -> Tuple[Tuple[int, ...], LossFamily]:
    """Shared covariate shape and family of a non-empty collection of datasets."""
    if len(datasets) == 0:
        raise InvalidInputError("at least one dataset is required")
    shape = datasets[0].param_shape
    family = datasets[0].family
    for k, d in enumerate(datasets[1:], start=1):
        if d.param_shape != shape:
            raise ShapeMismatchError(f"dataset {k} has shape {d.param_shape}, expected {shape}")
        if d.family is not family:
            raise InvalidInputError(
                f"dataset {k} has family {d.family.value}, expected {family.value}"
            )
    return shape, family


def concat_datasets(datasets: Sequence[Dataset]) -> Dataset:
    """Row-stack unit-weight datasets into one; the pooled fit of the parts equals its fit."""
    check_compatible(datasets)
    if any(d.weight != 1.0 for d in datasets):
        raise InvalidInputError("only unit-weight datasets can be concatenated")
    return Dataset(
        np.concatenate([d.covariates for d in datasets]),
        np.concatenate([d.responses for d in datasets]),
        family=datasets[0].family,
    )
