"""Estimation error norms, selection rates and convergence-rate slopes."""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from tlmest.common.errors import InvalidInputError, NumericError, ShapeMismatchError
from tlmest.core import Parameter, as_parameter


class ErrorRecord(NamedTuple):
    """Distances of an estimate from the truth; NaN where the norm does not apply."""

    l1: float
    l2: float
    nuc: float
    fro: float

    def primary(self) -> float:
        """The Euclidean (vector) or Frobenius (matrix) error."""
        return self.fro if np.isnan(self.l2) else self.l2


def error_metrics(
    estimate: Union[Parameter, np.ndarray], truth: Union[Parameter, np.ndarray]
) -> ErrorRecord:
    est, ref = as_parameter(estimate), as_parameter(truth)
    if est.shape != ref.shape:
        raise ShapeMismatchError(f"estimate shape {est.shape} vs truth shape {ref.shape}")
    diff = est.values - ref.values
    nan = float("nan")
    if est.is_matrix:
        try:
            singular = np.linalg.svd(diff, compute_uv=False)
        except np.linalg.LinAlgError as e:
            raise NumericError(f"SVD of the error matrix failed: {e}") from e
        return ErrorRecord(nan, nan, float(singular.sum()), float(np.linalg.norm(diff)))
    return ErrorRecord(float(np.abs(diff).sum()), float(np.linalg.norm(diff)), nan, nan)


def tpr_tnr(
    flags: Sequence[bool], truth: Sequence[bool]
) -> Tuple[Optional[float], Optional[float]]:
    """
    True positive and true negative rates of informative-source flags.

    A rate whose reference class is empty is returned as None.
    """
    if len(flags) != len(truth):
        raise InvalidInputError(f"{len(flags)} flags for {len(truth)} sources")
    flags_arr = np.asarray(flags, dtype=bool)
    truth_arr = np.asarray(truth, dtype=bool)
    positives = int(truth_arr.sum())
    negatives = truth_arr.size - positives
    tpr = float((flags_arr & truth_arr).sum() / positives) if positives else None
    tnr = float((~flags_arr & ~truth_arr).sum() / negatives) if negatives else None
    return tpr, tnr


def rate_slope(sizes: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(size)."""
    x = np.asarray(sizes, dtype=np.float64)
    y = np.asarray(errors, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("sizes and errors must be 1-d sequences of equal length")
    if x.size < 3:
        raise InvalidInputError(f"a rate slope needs at least 3 grid points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise InvalidInputError("sizes and errors must be positive and finite")
    if np.unique(x).size < 2:
        raise InvalidInputError("a rate slope needs at least two distinct sizes")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
