"""Truncated-penalty joint lasso: DC outer loop, consensus ADMM inner loop.

Per ADMM sweep each theta_k solves a lasso on artificial observations that stack the
sqrt(beta_k)-scaled data over sqrt(rho/2)-scaled identity rows; delta_k is either the
exact consensus gap (truncated sources) or its soft threshold.
"""

from __future__ import annotations

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from tlmest.common.errors import UnsupportedModelError
from tlmest.common.observability import traced
from tlmest.core import Dataset, LossFamily, RegularizerKind, check_compatible
from tlmest.solvers import GramLasso, admm_thresholds, prox_l1

from .config import SelectionConfig
from .dc import InnerOutcome, SelectionFit, run_dc
from .init import initial_state
from .objective import TruncatedObjective
from .state import SelectionState

logger = logging.getLogger(__name__)


def artificial_observations(
    d: Dataset, beta: float, rho: float, anchors: Sequence[np.ndarray], sign: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rows whose least squares reproduce beta ||y - X theta||^2 + (rho/2) sum ||theta - a||^2.

    Args:
        d: the dataset
        beta: loss weight, alpha_k / 2
        rho: ADMM penalty
        anchors: one block per entry; for a source the anchor is delta_k - theta_0 + nu_k
            with sign -1, for the target they are delta_k + theta_k + nu_k with sign +1
        sign: sign of the identity blocks

    Returns:
        (X', y') with n + len(anchors) * p rows
    """
    design = artificial_design(d, beta, rho, len(anchors), sign)
    return design, artificial_responses(d, beta, rho, anchors)


def artificial_design(d: Dataset, beta: float, rho: float, blocks: int, sign: float) -> np.ndarray:
    identity = sign * math.sqrt(rho / 2.0) * np.eye(d.dim)
    return np.vstack([math.sqrt(beta) * d.design] + [identity] * blocks)


def artificial_responses(
    d: Dataset, beta: float, rho: float, anchors: Sequence[np.ndarray]
) -> np.ndarray:
    root_rho = math.sqrt(rho / 2.0)
    return np.concatenate([math.sqrt(beta) * d.responses] + [root_rho * a for a in anchors])


def stacked_norm(arrays: Sequence[np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(a * a)) for a in arrays))


class _ArtificialLasso:
    """Lasso on fixed artificial rows; only the anchor rows change between sweeps."""

    def __init__(self, d: Dataset, beta: float, rho: float, blocks: int, sign: float):
        self.dataset = d
        self.beta = beta
        self.rho = rho
        self.design = artificial_design(d, beta, rho, blocks, sign)
        self.solver = GramLasso(self.design.T @ self.design)

    def solve(self, anchors: Sequence[np.ndarray], penalty: float, init: np.ndarray, opts):
        responses = artificial_responses(self.dataset, self.beta, self.rho, anchors)
        return self.solver.solve(self.design.T @ responses, penalty, init, opts)


class SparseConsensusADMM:
    def __init__(self, datasets: Sequence[Dataset], cfg: SelectionConfig, lambda_q: np.ndarray):
        self.opts = cfg.solver
        self.sizes = np.array([d.n for d in datasets], dtype=np.float64)
        # admm_rho is per observation
        self.rho = cfg.solver.admm_rho * float(self.sizes.mean())
        self.lambda_pool = cfg.lambda_pool
        self.lambda_q = lambda_q
        sources = len(datasets) - 1
        target = datasets[0]
        self.lassos = [_ArtificialLasso(target, 0.5 * target.weight, self.rho, sources, 1.0)]
        self.lassos += [
            _ArtificialLasso(d, 0.5 * d.weight, self.rho, 1, -1.0) for d in datasets[1:]
        ]

    def __call__(self, state: SelectionState, truncated: List[bool]) -> InnerOutcome:
        K = state.sources
        rho = self.rho
        dim = K * state.theta[0].size
        for sweep in range(1, self.opts.admm_max_iterations + 1):
            base = state.theta[0]
            for k in range(1, K + 1):
                anchor = state.delta[k - 1] - base + state.nu[k - 1]
                state.theta[k] = self.lassos[k].solve(
                    [anchor], self.sizes[k] * self.lambda_pool, state.theta[k], self.opts
                ).solution
            anchors = [state.delta[k] + state.theta[k + 1] + state.nu[k] for k in range(K)]
            state.theta[0] = self.lassos[0].solve(
                anchors, self.sizes[0] * self.lambda_pool, state.theta[0], self.opts
            ).solution

            previous = [dlt.copy() for dlt in state.delta]
            for k in range(K):
                gap = state.theta[0] - state.theta[k + 1] - state.nu[k]
                if truncated[k]:
                    state.delta[k] = gap
                else:
                    state.delta[k] = prox_l1(gap, self.sizes[k + 1] * self.lambda_q[k] / rho)
                state.nu[k] = state.nu[k] + state.delta[k] + state.theta[k + 1] - state.theta[0]

            gaps = [state.delta[k] + state.theta[k + 1] - state.theta[0] for k in range(K)]
            primal = stacked_norm(gaps)
            dual = rho * stacked_norm([state.delta[k] - previous[k] for k in range(K)])
            eps_primal, eps_dual = admm_thresholds(
                self.opts,
                dim,
                max(
                    stacked_norm([state.theta[0] - t for t in state.theta[1:]]),
                    stacked_norm(state.delta),
                ),
                rho * stacked_norm(state.nu),
            )
            if primal <= eps_primal and dual <= eps_dual:
                return InnerOutcome(sweep, True)
        return InnerOutcome(self.opts.admm_max_iterations, False)


def dc_truncated_sparse(datasets: Sequence[Dataset], cfg: SelectionConfig) -> SelectionFit:
    """
    Joint sparse estimation of the target and K sources under the truncated l1 contrast
    penalty.

    Args:
        datasets: target first, then the K sources; squared loss, vector covariates
        cfg: penalty levels, tau and solver settings

    Returns:
        SelectionFit; primal is theta_0
    """
    shape, family = check_compatible(datasets)
    if family is not LossFamily.SQUARED_IDENTITY or len(shape) != 1:
        raise UnsupportedModelError("sparse selection needs squared loss and vector covariates")
    if cfg.regularizer.kind is not RegularizerKind.L1:
        raise UnsupportedModelError("sparse selection needs the l1 regularizer")
    lambda_q = cfg.lambda_q_for(len(datasets) - 1)
    with traced("selection.dc_truncated_sparse", sources=len(datasets) - 1, dim=shape[0]) as info:
        objective = TruncatedObjective(
            datasets, cfg.lambda_pool, lambda_q, cfg.tau, cfg.regularizer
        )
        state = initial_state(datasets, cfg)
        fit = run_dc(objective, state, SparseConsensusADMM(datasets, cfg, lambda_q), cfg)
        info.update(dc_iterations=fit.dc_iterations, converged=fit.converged)
    return fit
