"""Difference-of-convex outer loop shared by the sparse and low-rank solvers.

Each DC iteration freezes the truncation indicators, solves the resulting convex upper
model with an inner ADMM and accepts the step only if it does not increase the upper
model, backtracking towards the previous iterate when it does. Since the upper model
touches S at the previous iterate, accepted steps never increase S.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from tlmest.common.errors import NumericError
from tlmest.core import Parameter

from .config import SelectionConfig
from .objective import TruncatedObjective, identify_informative
from .state import SelectionState

logger = logging.getLogger(__name__)

BACKTRACK_STEPS = 8
DESCENT_SLACK = 1e-8


@dataclass
class InnerOutcome:
    sweeps: int
    converged: bool


InnerSolver = Callable[[SelectionState, List[bool]], InnerOutcome]


@dataclass
class SelectionFit:
    """Result of the truncated-penalty joint estimator.

    ``informative_flags[k]`` is R(theta_k - theta_0) <= tau for source k.
    """

    primal: Parameter
    sources: List[Parameter]
    informative_flags: List[bool]
    dc_iterations: int
    converged: bool
    objective_trace: List[float] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    state: Optional[SelectionState] = None

    @property
    def thetas(self) -> List[Parameter]:
        return [self.primal, *self.sources]


def _backtrack(
    objective: TruncatedObjective,
    old: List[np.ndarray],
    new: List[np.ndarray],
    truncated: List[bool],
    reference: float,
) -> Optional[List[np.ndarray]]:
    step = 1.0
    for _ in range(BACKTRACK_STEPS):
        trial = new if step == 1.0 else [o + step * (n - o) for o, n in zip(old, new)]
        if objective.upper(trial, truncated) <= reference:
            return trial
        step *= 0.5
    return None


def run_dc(
    objective: TruncatedObjective,
    state: SelectionState,
    inner: InnerSolver,
    cfg: SelectionConfig,
) -> SelectionFit:
    current = objective.value(state.theta)
    state.objective_trace = [current]
    truncated = objective.indicators(state.theta)
    state.truncation_indicators = list(truncated)
    converged = False
    stop_reason = "max_dc_iterations"
    admm_converged: List[bool] = []
    iterations = 0

    for iterations in range(1, cfg.max_dc_iterations + 1):
        candidate = state.copy()
        outcome = inner(candidate, truncated)
        admm_converged.append(outcome.converged)
        if not outcome.converged:
            logger.debug("DC iteration %d: inner ADMM hit the sweep cap", iterations)

        accepted = _backtrack(objective, state.theta, candidate.theta, truncated, current)
        if accepted is None:
            logger.warning(
                "DC iteration %d: step did not decrease the upper model, keeping the "
                "previous iterate",
                iterations,
            )
            stop_reason = "no_descent"
            # a rejected step only marks a fixed point if its inner solve converged
            converged = outcome.converged
            iterations -= 1
            break
        if accepted is not candidate.theta:
            candidate.theta = accepted
            candidate.delta = [accepted[0] - t for t in accepted[1:]]

        value = objective.value(candidate.theta)
        if value > current + DESCENT_SLACK * max(1.0, abs(current)):
            raise NumericError(
                f"DC objective increased from {current:.10g} to {value:.10g} at iteration "
                f"{iterations}"
            )
        next_truncated = objective.indicators(candidate.theta)
        candidate.objective_trace.append(value)
        candidate.branch_history.append(["exact" if t else "shrink" for t in truncated])
        candidate.residual_history.append(candidate.consensus_residual())
        candidate.sweep_history.append(outcome.sweeps)
        candidate.truncation_indicators = list(next_truncated)
        state = candidate

        decrease = current - value
        logger.debug(
            "DC iteration %d: S=%.10g decrease=%.3e truncated=%s",
            iterations,
            value,
            decrease,
            next_truncated,
        )
        stalled = decrease <= cfg.dc_tolerance * max(1.0, abs(current))
        current = value
        if next_truncated == truncated and stalled:
            converged = True
            stop_reason = "stable"
            break
        truncated = next_truncated

    if not converged:
        logger.warning("truncated-penalty solver stopped after %d DC iterations", iterations)

    thetas = state.theta_parameters()
    details = state.summary()
    details.update(stop_reason=stop_reason, admm_converged=admm_converged)
    return SelectionFit(
        primal=thetas[0],
        sources=thetas[1:],
        informative_flags=identify_informative(thetas, cfg.tau, cfg.regularizer),
        dc_iterations=iterations,
        converged=converged,
        objective_trace=list(state.objective_trace),
        details=details,
        state=state,
    )
