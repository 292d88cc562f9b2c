from __future__ import annotations

import logging
from typing import List, Sequence

import numpy as np

from tlmest.core import Dataset
from tlmest.solvers import fit_single

from .config import SelectionConfig
from .state import SelectionState

logger = logging.getLogger(__name__)


def per_dataset_fits(datasets: Sequence[Dataset], cfg: SelectionConfig) -> List[np.ndarray]:
    """Each dataset fitted alone: argmin alpha_k L_k + lambda_P R, zero when alpha_k = 0."""
    fits = []
    for k, d in enumerate(datasets):
        if d.weight == 0:
            fits.append(np.zeros(d.param_shape))
            continue
        fit = fit_single(d, cfg.regularizer, cfg.lambda_pool / d.weight, cfg.solver)
        if not fit.converged:
            logger.warning("initial fit of dataset %d did not converge", k)
        fits.append(fit.parameter.copy_array())
    return fits


def initial_state(
    datasets: Sequence[Dataset], cfg: SelectionConfig, with_quadratic_blocks: bool = False
) -> SelectionState:
    theta = per_dataset_fits(datasets, cfg)
    state = SelectionState(
        theta=theta,
        delta=[theta[0] - t for t in theta[1:]],
        nu=[np.zeros_like(theta[0]) for _ in theta[1:]],
    )
    if with_quadratic_blocks:
        state.gamma = [np.zeros_like(t) for t in theta]
        state.mu = [np.zeros_like(t) for t in theta]
    return state
