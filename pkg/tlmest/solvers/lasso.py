"""Cyclic coordinate descent for the lasso, in Gram form."""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from tlmest.common.errors import InvalidInputError, ShapeMismatchError

from .options import SolverOptions
from .prox import soft_threshold
from .results import SolverResult

logger = logging.getLogger(__name__)


class GramLasso:
    """Minimizes theta^T G theta - 2 c^T theta + penalty * ||theta||_1 for a fixed PSD G.

    G stays fixed across solves, so the selection loop builds one instance per source
    and changes only ``c`` between ADMM sweeps. Coordinates are visited in the fixed
    order 0..p-1; after each full sweep, sweeps restricted to the nonzero coordinates run
    until they settle, then a full sweep checks the rest.
    """

    def __init__(self, gram: np.ndarray):
        gram = np.asarray(gram, dtype=np.float64)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise InvalidInputError(f"Gram matrix must be square, got shape {gram.shape}")
        self.gram = gram
        self.diag = np.diag(gram).copy()
        self.dim = gram.shape[0]

    def objective(self, theta: np.ndarray, c: np.ndarray, penalty: float, offset: float = 0.0):
        return float(
            theta @ (self.gram @ theta) - 2.0 * (c @ theta) + penalty * np.abs(theta).sum() + offset
        )

    def _sweep(self, theta: np.ndarray, grad: np.ndarray, half: float, coords) -> float:
        # grad holds c - G theta and is kept current after every move.
        gram, diag = self.gram, self.diag
        biggest = 0.0
        for j in coords:
            d = diag[j]
            old = theta[j]
            if d <= 0.0:
                new = 0.0
            else:
                new = soft_threshold(grad[j] + d * old, half) / d
            delta = new - old
            if delta != 0.0:
                theta[j] = new
                grad -= gram[j] * delta
                if abs(delta) > biggest:
                    biggest = abs(delta)
        return biggest

    def solve(
        self,
        c: np.ndarray,
        penalty: float,
        init: Optional[np.ndarray] = None,
        opts: Optional[SolverOptions] = None,
        offset: float = 0.0,
    ) -> SolverResult:
        opts = opts or SolverOptions()
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.dim,):
            raise ShapeMismatchError(f"linear term has shape {c.shape}, expected ({self.dim},)")
        if not np.isfinite(penalty) or penalty < 0:
            raise InvalidInputError(f"penalty must be finite and >= 0, got {penalty}")
        theta = np.zeros(self.dim) if init is None else np.array(init, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ShapeMismatchError(f"init has shape {theta.shape}, expected ({self.dim},)")
        # an all-zero column never moves away from 0
        theta[self.diag <= 0.0] = 0.0

        half = 0.5 * penalty
        grad = c - self.gram @ theta
        all_coords = range(self.dim)
        trace: List[float] = [self.objective(theta, c, penalty, offset)]
        sweeps = 0
        converged = False

        def settled(change: float) -> bool:
            return change <= opts.tolerance * max(1.0, float(np.max(np.abs(theta), initial=0.0)))

        while sweeps < opts.max_iterations:
            change = self._sweep(theta, grad, half, all_coords)
            sweeps += 1
            trace.append(self.objective(theta, c, penalty, offset))
            if settled(change):
                converged = True
                break
            active = np.flatnonzero(theta).tolist()
            while active and sweeps < opts.max_iterations:
                change = self._sweep(theta, grad, half, active)
                sweeps += 1
                if settled(change):
                    break

        if not converged:
            logger.warning(
                "lasso coordinate descent stopped after %d sweeps without converging", sweeps
            )
        return SolverResult(
            solution=theta, iterations=sweeps, converged=converged, objective_trace=trace
        )


def lasso_cd(
    x: np.ndarray,
    y: np.ndarray,
    lam: float,
    init: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None,
) -> SolverResult:
    """
    Solve argmin ||y - X theta||_2^2 + n * lam * ||theta||_1.

    Args:
        x: design, shape (n, p)
        y: responses, length n
        lam: penalty level, already on the n * lam scale of this objective
        init: warm start, zeros when omitted
        opts: iteration limit and tolerance

    Returns:
        SolverResult whose objective_trace holds the objective after each full sweep
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.ndim != 2:
        raise InvalidInputError(f"design must be a matrix, got shape {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"design has {x.shape[0]} rows but y has {y.shape[0]} entries")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("lasso input has non-finite values")
    n = x.shape[0]
    return GramLasso(x.T @ x).solve(x.T @ y, n * float(lam), init, opts, offset=float(y @ y))


def lasso_kkt_violation(x: np.ndarray, y: np.ndarray, lam: float, theta: np.ndarray) -> float:
    """Largest violation of the lasso optimality conditions, on the n * lam scale."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    corr = 2.0 * x.T @ (np.asarray(y, dtype=np.float64) - x @ theta)
    level = n * lam
    zero = theta == 0
    worst_zero = np.max(np.abs(corr[zero]) - level, initial=0.0)
    worst_active = np.max(np.abs(corr[~zero] - level * np.sign(theta[~zero])), initial=0.0)
    return float(max(worst_zero, worst_active))
