"""Second step: correct the pooled estimate on the target study alone."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional

import numpy as np

from tlmest.common.errors import InvalidInputError
from tlmest.core import Dataset, Parameter, Regularizer
from tlmest.solvers import SolverOptions, fit_weighted
from tlmest.tuning import TuningGrid, cv_select, default_grid, shifted_lambda_max

logger = logging.getLogger(__name__)

SLACK_ZETA = 1e-8
BISECTION_STEPS = 20
BAND = 0.99


@dataclass
class FineTuneResult:
    delta: Parameter
    theta: Parameter
    converged: bool = True
    iterations: int = 0
    details: Dict[str, Any] = field(default_factory=dict)

    def __iter__(self) -> Iterator[Parameter]:
        yield self.delta
        yield self.theta


def fine_tune_lagrangian(
    target: Dataset,
    theta_pool: Parameter,
    zeta: float,
    r: Regularizer,
    opts: Optional[SolverOptions] = None,
) -> FineTuneResult:
    """delta = argmin L_0(theta_pool + delta) + zeta * R(delta); theta* = theta_pool + delta."""
    target.check_parameter(theta_pool)
    fit = fit_weighted([target.with_weight(1.0)], r, zeta, opts, shift=theta_pool)
    delta = fit.parameter
    return FineTuneResult(
        delta=delta,
        theta=theta_pool + delta,
        converged=fit.converged,
        iterations=fit.iterations,
        details={"form": "lagrangian", "zeta": float(zeta)},
    )


def fine_tune_constrained(
    target: Dataset,
    theta_pool: Parameter,
    radius: float,
    r: Regularizer,
    opts: Optional[SolverOptions] = None,
) -> FineTuneResult:
    """
    Approximate argmin L_0(theta_pool + delta) subject to R(delta) <= radius.

    Solved by bisection over the Lagrangian level zeta: the slack solution at zeta=1e-8 is
    returned when it is feasible; otherwise zeta is bisected on a log scale until R(delta)
    lands in [0.99 * radius, radius]. The returned delta is always feasible.
    """
    radius = float(radius)
    if not np.isfinite(radius) or radius < 0:
        raise InvalidInputError(f"radius must be finite and >= 0, got {radius}")
    tol = (opts or SolverOptions()).tolerance
    if radius == 0.0:
        zero = Parameter.zeros(theta_pool.shape)
        return FineTuneResult(
            zero, theta_pool + zero, details={"form": "constrained", "active": True, "zeta": None}
        )

    slack = fine_tune_lagrangian(target, theta_pool, SLACK_ZETA, r, opts)
    if r.norm(slack.delta) <= radius + tol:
        slack.details.update(form="constrained", active=False, bracketed=True)
        return slack

    hi = shifted_lambda_max(target, theta_pool, r)
    lo = SLACK_ZETA
    best = fine_tune_lagrangian(target, theta_pool, hi, r, opts) if hi > lo else None
    if best is None or r.norm(best.delta) > radius + tol:
        logger.warning("constrained fine-tuning could not bracket radius %.4g", radius)
        zero = Parameter.zeros(theta_pool.shape)
        return FineTuneResult(
            zero,
            theta_pool + zero,
            converged=False,
            details={"form": "constrained", "active": True, "bracketed": False, "zeta": None},
        )

    best_zeta = hi
    in_band = False
    for _ in range(BISECTION_STEPS):
        mid = math.sqrt(lo * hi)
        trial = fine_tune_lagrangian(target, theta_pool, mid, r, opts)
        size = r.norm(trial.delta)
        if size > radius + tol:
            lo = mid
            continue
        hi, best, best_zeta = mid, trial, mid
        if size >= BAND * radius:
            in_band = True
            break
    if not in_band:
        logger.warning(
            "constrained fine-tuning: R(delta)=%.4g did not reach the band below radius %.4g",
            r.norm(best.delta),
            radius,
        )
    best.details.update(
        form="constrained", active=True, bracketed=True, in_band=in_band, zeta=best_zeta
    )
    return best


def fine_tune_cv(
    target: Dataset,
    theta_pool: Parameter,
    r: Regularizer,
    opts: Optional[SolverOptions] = None,
    folds: int = 5,
    grid_size: int = 20,
    seed: int = 0,
) -> FineTuneResult:
    """Lagrangian fine-tuning with zeta chosen by K-fold CV on the target."""
    top = shifted_lambda_max(target, theta_pool, r)
    if top <= 0:
        zero = Parameter.zeros(theta_pool.shape)
        return FineTuneResult(zero, theta_pool + zero, details={"form": "cv", "zeta": 0.0})

    def fitter(train: Dataset, zeta: float) -> Parameter:
        return fine_tune_lagrangian(train, theta_pool, zeta, r, opts).theta

    grid = TuningGrid(default_grid(top, num=grid_size), folds=folds)
    zeta, curve = cv_select(target, fitter, grid, seed)
    result = fine_tune_lagrangian(target, theta_pool, zeta, r, opts)
    result.details.update(form="cv", cv_curve=curve.tolist())
    return result
