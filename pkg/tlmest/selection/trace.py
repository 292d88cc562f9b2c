"""Truncated-penalty joint estimation of low-rank matrices under GLM losses.

Every DC iteration replaces each loss by its quadratic model around the current iterate,
so one inner ADMM solve serves as both the DC step and a proximal Newton step. The
gamma_k blocks carry the quadratic models and are solved through the cached Cholesky
factor of n_k alpha_k H_k + rho2 I.
"""

from __future__ import annotations

import logging
import math
from typing import List, Sequence

import numpy as np

from tlmest.common.errors import UnsupportedModelError
from tlmest.common.observability import traced
from tlmest.core import Dataset, RegularizerKind, WeightedObjective, check_compatible
from tlmest.solvers import PDFactor, admm_thresholds, svd_shrink

from .config import SelectionConfig
from .dc import InnerOutcome, SelectionFit, run_dc
from .init import initial_state
from .objective import TruncatedObjective
from .sparse import stacked_norm
from .state import SelectionState

logger = logging.getLogger(__name__)


class TraceConsensusADMM:
    def __init__(self, datasets: Sequence[Dataset], cfg: SelectionConfig, lambda_q: np.ndarray):
        self.opts = cfg.solver
        self.losses = [WeightedObjective.single(d) for d in datasets]
        self.sizes = np.array([d.n for d in datasets], dtype=np.float64)
        self.weights = np.array([d.weight for d in datasets], dtype=np.float64)
        mean_n = float(self.sizes.mean())
        # both penalties are per observation
        self.rho1 = cfg.solver.admm_rho1 * mean_n
        self.rho2 = cfg.solver.admm_rho2 * mean_n
        self.lambda_pool = cfg.lambda_pool
        self.lambda_q = lambda_q

    def _models(self, anchors: List[np.ndarray]):
        factors, grads = [], []
        for k, loss in enumerate(self.losses):
            flat = anchors[k].reshape(-1)
            scale = self.sizes[k] * self.weights[k]
            hess = scale * loss.hessian(flat) + self.rho2 * np.eye(flat.size)
            factors.append(PDFactor(hess))
            grads.append(scale * loss.gradient(flat))
        return factors, grads

    def __call__(self, state: SelectionState, truncated: List[bool]) -> InnerOutcome:
        K = state.sources
        rho1, rho2 = self.rho1, self.rho2
        shape = state.theta[0].shape
        anchors = [t.copy() for t in state.theta]
        factors, grads = self._models(anchors)
        state.gamma = [np.zeros(shape) for _ in anchors]
        state.mu = [np.zeros(shape) for _ in anchors]
        dim = (2 * K + 1) * state.theta[0].size

        for sweep in range(1, self.opts.admm_max_iterations + 1):
            base = state.theta[0]
            previous_theta = [t.copy() for t in state.theta]
            previous_delta = [dlt.copy() for dlt in state.delta]
            both = rho1 + rho2
            for k in range(1, K + 1):
                target = rho1 * (base - state.delta[k - 1] - state.nu[k - 1]) + rho2 * (
                    state.gamma[k] + anchors[k] + state.mu[k]
                )
                state.theta[k] = svd_shrink(target / both, self.sizes[k] * self.lambda_pool / both)
            pooled = sum(
                state.delta[k] + state.theta[k + 1] + state.nu[k] for k in range(K)
            )
            weight0 = K * rho1 + rho2
            target0 = rho1 * pooled + rho2 * (state.gamma[0] + anchors[0] + state.mu[0])
            state.theta[0] = svd_shrink(
                target0 / weight0, self.sizes[0] * self.lambda_pool / weight0
            )

            for k in range(K):
                gap = state.theta[0] - state.theta[k + 1] - state.nu[k]
                if truncated[k]:
                    state.delta[k] = gap
                else:
                    state.delta[k] = svd_shrink(gap, self.sizes[k + 1] * self.lambda_q[k] / rho1)

            for k in range(K + 1):
                rhs = rho2 * (state.theta[k] - anchors[k] - state.mu[k]).reshape(-1) - grads[k]
                state.gamma[k] = factors[k].solve(rhs).reshape(shape)

            for k in range(K):
                state.nu[k] = state.nu[k] + state.delta[k] + state.theta[k + 1] - state.theta[0]
            for k in range(K + 1):
                state.mu[k] = state.mu[k] + state.gamma[k] - state.theta[k] + anchors[k]

            consensus = [state.delta[k] + state.theta[k + 1] - state.theta[0] for k in range(K)]
            linear = [state.gamma[k] - state.theta[k] + anchors[k] for k in range(K + 1)]
            primal = math.hypot(stacked_norm(consensus), stacked_norm(linear))
            dual = math.hypot(
                rho1 * stacked_norm([state.delta[k] - previous_delta[k] for k in range(K)]),
                rho2 * stacked_norm([state.theta[k] - previous_theta[k] for k in range(K + 1)]),
            )
            eps_primal, eps_dual = admm_thresholds(
                self.opts,
                dim,
                max(
                    stacked_norm(state.theta),
                    stacked_norm(state.delta),
                    stacked_norm(state.gamma),
                ),
                math.hypot(rho1 * stacked_norm(state.nu), rho2 * stacked_norm(state.mu)),
            )
            if primal <= eps_primal and dual <= eps_dual:
                return InnerOutcome(sweep, True)
        return InnerOutcome(self.opts.admm_max_iterations, False)


def dc_truncated_trace(datasets: Sequence[Dataset], cfg: SelectionConfig) -> SelectionFit:
    """Joint low-rank estimation of the target and K sources, identity or logit link."""
    shape, family = check_compatible(datasets)
    if len(shape) != 2:
        raise UnsupportedModelError("trace selection needs matrix-shaped covariates")
    if cfg.regularizer.kind is not RegularizerKind.NUCLEAR:
        raise UnsupportedModelError("trace selection needs the nuclear-norm regularizer")
    lambda_q = cfg.lambda_q_for(len(datasets) - 1)
    with traced(
        "selection.dc_truncated_trace",
        sources=len(datasets) - 1,
        family=family.value,
        d1=shape[0],
        d2=shape[1],
    ) as info:
        objective = TruncatedObjective(
            datasets, cfg.lambda_pool, lambda_q, cfg.tau, cfg.regularizer
        )
        state = initial_state(datasets, cfg, with_quadratic_blocks=True)
        fit = run_dc(objective, state, TraceConsensusADMM(datasets, cfg, lambda_q), cfg)
        info.update(dc_iterations=fit.dc_iterations, converged=fit.converged)
    return fit
