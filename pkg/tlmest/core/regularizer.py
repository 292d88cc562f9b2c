"""Decomposable norm regularizers: entrywise l1 and the nuclear norm."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from tlmest.common.errors import InvalidInputError, NumericError, UnsupportedModelError

from .parameter import Parameter


class RegularizerKind(str, Enum):
    L1 = "l1"
    NUCLEAR = "nuclear"


def _as_array(theta: Union[Parameter, np.ndarray]) -> np.ndarray:
    arr = theta.values if isinstance(theta, Parameter) else np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("regularizer argument has non-finite entries")
    return arr


def _singular_values(arr: np.ndarray) -> np.ndarray:
    if arr.ndim != 2:
        raise UnsupportedModelError("the nuclear norm needs a matrix-shaped parameter")
    try:
        return np.linalg.svd(arr, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"SVD failed: {e}") from e


@dataclass(frozen=True)
class Regularizer:
    kind: RegularizerKind

    @classmethod
    def l1(cls) -> "Regularizer":
        return cls(RegularizerKind.L1)

    @classmethod
    def nuclear(cls) -> "Regularizer":
        return cls(RegularizerKind.NUCLEAR)

    @classmethod
    def parse(cls, value: Union[str, "Regularizer"]) -> "Regularizer":
        if isinstance(value, Regularizer):
            return value
        try:
            return cls(RegularizerKind(str(value).strip().lower()))
        except ValueError as e:
            raise InvalidInputError(f"unknown regularizer {value!r}") from e

    def norm(self, theta: Union[Parameter, np.ndarray]) -> float:
        arr = _as_array(theta)
        if self.kind is RegularizerKind.L1:
            return float(np.sum(np.abs(arr)))
        return float(np.sum(_singular_values(arr)))

    def dual_norm(self, v: Union[Parameter, np.ndarray]) -> float:
        arr = _as_array(v)
        if self.kind is RegularizerKind.L1:
            return float(np.max(np.abs(arr)))
        return float(np.max(_singular_values(arr)))

    def prox(self, values: np.ndarray, threshold: float) -> np.ndarray:
        """Proximal map of threshold * norm."""
        from tlmest.solvers.prox import prox_l1, svd_shrink

        if self.kind is RegularizerKind.L1:
            return prox_l1(values, threshold)
        return svd_shrink(values, threshold)


def regularizer_norm(r: Regularizer, theta: Union[Parameter, np.ndarray]) -> float:
    return r.norm(theta)


def regularizer_dual_norm(r: Regularizer, v: Union[Parameter, np.ndarray]) -> float:
    return r.dual_norm(v)
