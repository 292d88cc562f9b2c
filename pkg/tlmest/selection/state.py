from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from tlmest.core import Parameter


@dataclass
class SelectionState:
    """Working iterate of the DC + ADMM solver.

    ``theta[0]`` is the target; ``delta``, ``nu`` are per source and ``gamma``, ``mu`` per
    dataset (empty in the sparse solver). Arrays are in parameter shape.
    """

    theta: List[np.ndarray]
    delta: List[np.ndarray]
    nu: List[np.ndarray]
    gamma: List[np.ndarray] = field(default_factory=list)
    mu: List[np.ndarray] = field(default_factory=list)
    objective_trace: List[float] = field(default_factory=list)
    truncation_indicators: List[bool] = field(default_factory=list)
    branch_history: List[List[str]] = field(default_factory=list)
    residual_history: List[float] = field(default_factory=list)
    sweep_history: List[int] = field(default_factory=list)

    @property
    def sources(self) -> int:
        return len(self.delta)

    def copy(self) -> "SelectionState":
        def dup(arrays: List[np.ndarray]) -> List[np.ndarray]:
            return [a.copy() for a in arrays]

        return SelectionState(
            theta=dup(self.theta),
            delta=dup(self.delta),
            nu=dup(self.nu),
            gamma=dup(self.gamma),
            mu=dup(self.mu),
            objective_trace=list(self.objective_trace),
            truncation_indicators=list(self.truncation_indicators),
            branch_history=[list(b) for b in self.branch_history],
            residual_history=list(self.residual_history),
            sweep_history=list(self.sweep_history),
        )

    def consensus_residual(self) -> float:
        """max_k ||delta_k + theta_k - theta_0||_F."""
        return max(
            float(np.linalg.norm(self.delta[k] + self.theta[k + 1] - self.theta[0]))
            for k in range(self.sources)
        )

    def theta_parameters(self) -> List[Parameter]:
        return [Parameter(t) for t in self.theta]

    def summary(self) -> Dict[str, Any]:
        return {
            "objective_trace": list(self.objective_trace),
            "truncation_indicators": list(self.truncation_indicators),
            "branch_history": [list(b) for b in self.branch_history],
            "consensus_residuals": list(self.residual_history),
            "admm_sweeps": list(self.sweep_history),
        }
