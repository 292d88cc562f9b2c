"""Penalized fits of L(theta) + lam * R(theta) on one dataset or a weighted pool."""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np

from tlmest.common.errors import InvalidInputError, UnsupportedModelError
from tlmest.core import (
    Dataset,
    LossFamily,
    Parameter,
    Regularizer,
    RegularizerKind,
    WeightedObjective,
    check_compatible,
)

from .lasso import lasso_cd
from .nuclear import minimize_nuclear
from .options import SolverOptions
from .results import FitResult

logger = logging.getLogger(__name__)


def _start(shape, init: Optional[Union[Parameter, np.ndarray]]) -> Optional[np.ndarray]:
    if init is None:
        return None
    values = init.values if isinstance(init, Parameter) else np.asarray(init, dtype=np.float64)
    if values.shape != tuple(shape):
        raise InvalidInputError(f"init has shape {values.shape}, expected {tuple(shape)}")
    return values


def fit_weighted(
    datasets: Sequence[Dataset],
    r: Regularizer,
    lam: float,
    opts: Optional[SolverOptions] = None,
    init: Optional[Union[Parameter, np.ndarray]] = None,
    shift: Optional[Parameter] = None,
) -> FitResult:
    """
    Minimize (1/n_P) sum_k alpha_k sum_i loss_k,i(theta + shift) + lam * R(theta).

    n_P is the total row count of the pool. Squared loss with the l1 penalty becomes one
    lasso on sqrt(alpha_k)-scaled stacked rows; any family with the nuclear penalty goes
    through the quadratic-approximation ADMM.

    Args:
        datasets: the pool, sharing covariate shape and family
        r: L1 or nuclear
        lam: penalty level on the averaged-loss scale
        opts: solver options
        init: warm start for theta
        shift: fixed offset added to theta inside the loss

    Returns:
        FitResult holding theta (without the shift)
    """
    opts = opts or SolverOptions()
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise InvalidInputError(f"lambda must be finite and >= 0, got {lam}")
    shape, family = check_compatible(datasets)
    start = _start(shape, init)

    if r.kind is RegularizerKind.L1 and family is LossFamily.SQUARED_IDENTITY:
        roots = np.concatenate([np.full(d.n, np.sqrt(d.weight)) for d in datasets])
        design = np.vstack([d.design for d in datasets])
        responses = np.concatenate([d.responses for d in datasets])
        if shift is not None:
            responses = responses - design @ shift.values.reshape(-1)
        result = lasso_cd(
            design * roots[:, None],
            responses * roots,
            2.0 * lam,
            None if start is None else start.reshape(-1),
            opts,
        )
        return FitResult.from_solver(result, shape)

    if r.kind is RegularizerKind.NUCLEAR:
        if len(shape) != 2:
            raise UnsupportedModelError("the nuclear norm needs matrix-shaped covariates")
        objective = WeightedObjective.pooled(datasets, shift=shift)
        return FitResult.from_solver(minimize_nuclear(objective, lam, start, opts), shape)

    raise UnsupportedModelError(
        f"no solver for family '{family.value}' with the {r.kind.value} penalty"
    )


def fit_single(
    d: Dataset,
    r: Regularizer,
    lam: float,
    opts: Optional[SolverOptions] = None,
    init: Optional[Union[Parameter, np.ndarray]] = None,
) -> FitResult:
    """Minimize L_d(theta) + lam * R(theta); the dataset's own weight is ignored."""
    return fit_weighted([d.with_weight(1.0)], r, lam, opts, init)
