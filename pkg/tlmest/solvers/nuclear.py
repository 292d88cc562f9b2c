"""Nuclear-norm penalized GLM fits by quadratic approximation plus scaled ADMM.

Each outer step replaces the loss by its second-order model Q(gamma) around the current
iterate theta_m and solves

    min_gamma, theta  Q(gamma) + lam * ||theta||_N   s.t.  gamma = theta - theta_m

with scaled ADMM. The gamma block is the linear system (H + rho I) gamma = rhs, factored
once per outer step.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Union

import numpy as np

from tlmest.common.errors import InvalidInputError, UnsupportedModelError
from tlmest.core import Dataset, Parameter, WeightedObjective

from .linalg import PDFactor
from .options import SolverOptions
from .prox import svd_shrink
from .results import SolverResult

logger = logging.getLogger(__name__)


def admm_thresholds(opts: SolverOptions, dim: int, primal_scale: float, dual_scale: float):
    root = math.sqrt(dim)
    return (
        opts.residual_abs * root + opts.residual_rel * primal_scale,
        opts.residual_abs * root + opts.residual_rel * dual_scale,
    )


def minimize_nuclear(
    objective: WeightedObjective,
    lam: float,
    init: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None,
    rho: Optional[float] = None,
) -> SolverResult:
    """Approximate argmin objective(theta) + lam * ||theta||_N over d1 x d2 matrices."""
    opts = opts or SolverOptions()
    if len(objective.param_shape) != 2:
        raise UnsupportedModelError("the nuclear norm needs matrix-shaped covariates")
    if not np.isfinite(lam) or lam < 0:
        raise InvalidInputError(f"lambda must be finite and >= 0, got {lam}")
    rho = opts.admm_rho if rho is None else float(rho)
    shape = objective.param_shape
    dim = objective.dim
    eye = np.eye(dim)

    theta_m = np.zeros(shape) if init is None else np.array(init, dtype=np.float64).reshape(shape)
    residuals: List[float] = []
    trace: List[float] = []
    inner_counts: List[int] = []
    converged = False
    outer = 0

    for outer in range(1, opts.max_outer_iterations + 1):
        flat_m = theta_m.reshape(-1)
        grad = objective.gradient(flat_m)
        factor = PDFactor(objective.hessian(flat_m) + rho * eye)

        theta = theta_m.copy()
        gamma = np.zeros(dim)
        mu = np.zeros(dim)
        primal = 0.0
        for sweep in range(1, opts.admm_max_iterations + 1):
            previous = theta
            theta = svd_shrink((gamma + mu).reshape(shape) + theta_m, lam / rho)
            step = theta.reshape(-1) - flat_m
            gamma = factor.solve(rho * (step - mu) - grad)
            mu = mu + gamma - step
            primal = float(np.linalg.norm(gamma - step))
            dual = rho * float(np.linalg.norm(theta - previous))
            eps_primal, eps_dual = admm_thresholds(
                opts,
                dim,
                max(float(np.linalg.norm(gamma)), float(np.linalg.norm(step))),
                rho * float(np.linalg.norm(mu)),
            )
            if primal <= eps_primal and dual <= eps_dual:
                break
        inner_counts.append(sweep)
        residuals.append(primal)

        change = float(np.linalg.norm(theta - theta_m))
        size = float(np.linalg.norm(theta_m))
        theta_m = theta
        penalty = lam * float(np.linalg.norm(theta_m, "nuc"))
        trace.append(objective.value(theta_m.reshape(-1)) + penalty)
        logger.debug("nuclear outer step %d: change=%.3e inner=%d", outer, change, sweep)
        if change <= opts.tolerance * (1.0 + size):
            converged = True
            break

    if not converged:
        logger.warning(
            "nuclear-norm fit stopped after %d outer steps without converging", outer
        )
    return SolverResult(
        solution=theta_m,
        iterations=outer,
        converged=converged,
        objective_trace=trace,
        residuals=residuals,
        details={"inner_iterations": inner_counts},
    )


def quad_admm_nuclear(
    d: Dataset,
    lam: float,
    init: Optional[Union[Parameter, np.ndarray]] = None,
    opts: Optional[SolverOptions] = None,
) -> SolverResult:
    """Fit L_d(theta) + lam * ||theta||_N on one matrix-shaped dataset."""
    if not d.is_matrix:
        raise UnsupportedModelError("quad_admm_nuclear needs matrix-shaped covariates")
    start = None
    if init is not None:
        start = d.check_parameter(init).reshape(d.param_shape)
    return minimize_nuclear(WeightedObjective.single(d), lam, start, opts)
