"""Truncated-penalty primal estimate followed by fine-tuning on the target."""

from __future__ import annotations

from typing import Sequence, Tuple

from tlmest.core import Dataset, RegularizerKind
from tlmest.transfer import FineTune, TransferConfig, TransferFit, fine_tune

from .config import SelectionConfig
from .dc import SelectionFit
from .sparse import dc_truncated_sparse
from .trace import dc_truncated_trace


def select(datasets: Sequence[Dataset], cfg: SelectionConfig) -> SelectionFit:
    """Dispatch on the regularizer: l1 to the sparse solver, nuclear to the trace solver."""
    if cfg.regularizer.kind is RegularizerKind.L1:
        return dc_truncated_sparse(datasets, cfg)
    return dc_truncated_trace(datasets, cfg)


def select_and_transfer(
    datasets: Sequence[Dataset],
    cfg: SelectionConfig,
    finetune: FineTune,
    cv_seed: int = 0,
) -> Tuple[SelectionFit, TransferFit]:
    selection = select(datasets, cfg)
    step_cfg = TransferConfig(
        lambda_pool=cfg.lambda_pool,
        finetune=finetune,
        regularizer=cfg.regularizer,
        solver=cfg.solver,
        cv_seed=cv_seed,
    )
    step = fine_tune(datasets[0], selection.primal, step_cfg)
    fit = TransferFit(
        primal=selection.primal,
        finetuned=selection.primal + step.delta,
        delta=step.delta,
        diagnostics={
            "selection_converged": selection.converged,
            "dc_iterations": selection.dc_iterations,
            "informative_flags": list(selection.informative_flags),
            "finetune_converged": step.converged,
            "finetune": dict(step.details),
        },
    )
    return selection, fit
