from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from tlmest.core import Parameter


@dataclass
class SolverResult:
    """Raw solver output on array coordinates."""

    solution: np.ndarray
    iterations: int
    converged: bool
    objective_trace: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class FitResult:
    """A fitted Parameter plus the diagnostics of the solve that produced it."""

    parameter: Parameter
    iterations: int
    converged: bool
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_solver(cls, result: SolverResult, shape) -> "FitResult":
        details = dict(result.details)
        if result.objective_trace:
            details.setdefault("objective", result.objective_trace[-1])
        if result.residuals:
            details.setdefault("final_residual", result.residuals[-1])
        return cls(
            parameter=Parameter(result.solution.reshape(shape)),
            iterations=result.iterations,
            converged=result.converged,
            details=details,
        )
