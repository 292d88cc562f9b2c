"""Exhaustive grid search over the (lambda_Q, tau) pair of the truncated estimator."""

from __future__ import annotations

import logging
from typing import Any, Callable, List, NamedTuple, Sequence, Tuple

import numpy as np

from tlmest.common.errors import InvalidInputError

logger = logging.getLogger(__name__)


class GridChoice(NamedTuple):
    lambda_q: float
    tau: float
    score: float
    table: List[Tuple[float, float, float]]


def grid_select(
    studies: Any,
    objective: Callable[[Any, float, float], float],
    lambda_q_grid: Sequence[float],
    tau_grid: Sequence[float],
) -> GridChoice:
    """
    Evaluate objective(studies, lambda_q, tau) on every grid cell and return the argmin.

    Ties go to the larger tau, then to the larger lambda_q.
    """
    lq = [float(v) for v in lambda_q_grid]
    taus = [float(v) for v in tau_grid]
    if not lq or not taus:
        raise InvalidInputError("grid_select needs nonempty lambda_q and tau grids")
    table: List[Tuple[float, float, float]] = []
    for tau in taus:
        for lam_q in lq:
            score = float(objective(studies, lam_q, tau))
            table.append((lam_q, tau, score))
            logger.debug("grid cell lambda_q=%.4g tau=%.4g score=%.6g", lam_q, tau, score)

    scores = np.array([row[2] for row in table])
    finite = np.isfinite(scores)
    if not np.any(finite):
        raise InvalidInputError("every grid cell produced a non-finite score")
    best = float(np.min(scores[finite]))
    tol = 1e-12 * max(1.0, abs(best))
    winners = [row for row in table if np.isfinite(row[2]) and row[2] <= best + tol]
    lam_q, tau, score = max(winners, key=lambda row: (row[1], row[0]))
    return GridChoice(lam_q, tau, score, table)
