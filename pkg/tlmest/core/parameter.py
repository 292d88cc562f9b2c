"""Coefficient objects: a length-p vector or a d1 x d2 matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from tlmest.common.errors import InvalidInputError, ShapeMismatchError

ArrayLike = Union[np.ndarray, list, tuple]


def _frozen(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim not in (1, 2):
        raise InvalidInputError(f"Parameter must be 1-d or 2-d, got ndim={arr.ndim}")
    if arr.size == 0:
        raise InvalidInputError("Parameter must have at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("Parameter entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Parameter:
    """An immutable coefficient vector or matrix.

    Arithmetic is only defined between parameters of identical shape.
    """

    values: np.ndarray

    def __init__(self, values: ArrayLike):
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def zeros(cls, shape: Union[int, Tuple[int, ...]]) -> "Parameter":
        return cls(np.zeros(shape))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 2

    @property
    def size(self) -> int:
        return self.values.size

    def vec(self) -> np.ndarray:
        """Row-major flattening, matching how covariates are flattened."""
        return self.values.reshape(-1)

    def copy_array(self) -> np.ndarray:
        return np.array(self.values, copy=True)

    def _check(self, other: "Parameter") -> None:
        if not isinstance(other, Parameter):
            raise TypeError(f"expected Parameter, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatchError(f"shape {self.shape} does not match {other.shape}")

    def __add__(self, other: "Parameter") -> "Parameter":
        self._check(other)
        return Parameter(self.values + other.values)

    def __sub__(self, other: "Parameter") -> "Parameter":
        self._check(other)
        return Parameter(self.values - other.values)

    def __mul__(self, scalar: float) -> "Parameter":
        return Parameter(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Parameter":
        return Parameter(-self.values)

    def inner(self, other: "Parameter") -> float:
        """Frobenius pairing sum_ij A_ij B_ij."""
        self._check(other)
        return float(np.sum(self.values * other.values))

    def allclose(self, other: "Parameter", atol: float = 1e-8) -> bool:
        self._check(other)
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"Parameter(shape={self.shape})"


def as_parameter(value: Union["Parameter", ArrayLike]) -> Parameter:
    return value if isinstance(value, Parameter) else Parameter(value)
