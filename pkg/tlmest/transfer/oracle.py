"""Weighted pooling followed by target fine-tuning."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

from tlmest.common.errors import InvalidInputError
from tlmest.common.observability import traced
from tlmest.core import Dataset, Parameter
from tlmest.solvers import FitResult, fit_weighted

from .config import FineTuneKind, TransferConfig
from .finetune import FineTuneResult, fine_tune_constrained, fine_tune_cv, fine_tune_lagrangian

logger = logging.getLogger(__name__)


@dataclass
class TransferFit:
    """Pooled estimate, its fine-tuned correction and solver diagnostics.

    ``finetuned`` is built as ``primal + delta``.
    """

    primal: Parameter
    finetuned: Parameter
    delta: Parameter
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(
            self.diagnostics.get("pool_converged", True)
            and self.diagnostics.get("selection_converged", True)
            and self.diagnostics.get("finetune_converged", True)
        )


def pooled_fit(
    datasets: Sequence[Dataset], cfg: TransferConfig, init: Optional[Parameter] = None
) -> FitResult:
    return fit_weighted(datasets, cfg.regularizer, cfg.lambda_pool, cfg.solver, init)


def pooled_estimate(datasets: Sequence[Dataset], cfg: TransferConfig) -> Parameter:
    """argmin (1/n_P) sum_k alpha_k n_k L_k(theta) + lambda_P R(theta) over the pool."""
    fit = pooled_fit(datasets, cfg)
    if not fit.converged:
        logger.warning("pooled estimate did not converge after %d iterations", fit.iterations)
    return fit.parameter


def fine_tune(target: Dataset, theta_pool: Parameter, cfg: TransferConfig) -> FineTuneResult:
    spec = cfg.finetune
    if spec.kind is FineTuneKind.NONE:
        zero = Parameter.zeros(theta_pool.shape)
        return FineTuneResult(zero, theta_pool + zero, details={"form": "none"})
    if spec.kind is FineTuneKind.LAGRANGIAN:
        return fine_tune_lagrangian(target, theta_pool, spec.value, cfg.regularizer, cfg.solver)
    if spec.kind is FineTuneKind.CONSTRAINED:
        return fine_tune_constrained(target, theta_pool, spec.value, cfg.regularizer, cfg.solver)
    return fine_tune_cv(
        target,
        theta_pool,
        cfg.regularizer,
        cfg.solver,
        folds=cfg.cv_folds,
        grid_size=cfg.cv_grid_size,
        seed=cfg.cv_seed,
    )


def oracle_transfer(
    datasets: Sequence[Dataset], target_index: int, cfg: TransferConfig
) -> TransferFit:
    """
    Pool the target with the given sources, then fine-tune on the target.

    Args:
        datasets: the target and the sources believed informative
        target_index: position of the target within ``datasets``
        cfg: pooled penalty, fine-tuning variant and solver options

    Returns:
        TransferFit; with fine-tuning disabled, delta is zero and finetuned == primal
    """
    if not 0 <= target_index < len(datasets):
        raise InvalidInputError(
            f"target_index {target_index} out of range for {len(datasets)} datasets"
        )
    with traced(
        "transfer.oracle_transfer",
        datasets=len(datasets),
        finetune=cfg.finetune.kind.value,
        regularizer=cfg.regularizer.kind.value,
    ) as info:
        pooled = pooled_fit(datasets, cfg)
        if not pooled.converged:
            logger.warning("pooling step did not converge after %d iterations", pooled.iterations)
        step = fine_tune(datasets[target_index], pooled.parameter, cfg)
        if not step.converged:
            logger.warning("fine-tuning step did not converge")
        info.update(pool_iterations=pooled.iterations, finetune_form=step.details.get("form"))

    diagnostics: Dict[str, Any] = {
        "pool_iterations": pooled.iterations,
        "pool_converged": pooled.converged,
        "finetune_iterations": step.iterations,
        "finetune_converged": step.converged,
        "finetune": dict(step.details),
    }
    if "objective" in pooled.details:
        diagnostics["pool_objective"] = pooled.details["objective"]
    return TransferFit(
        primal=pooled.parameter,
        finetuned=pooled.parameter + step.delta,
        delta=step.delta,
        diagnostics=diagnostics,
    )
