"""Iteration limits, tolerances and ADMM penalties shared by all solvers."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Mapping

from tlmest.common.errors import ConfigError
from tlmest.common.schema import from_mapping


@dataclass(frozen=True)
class SolverOptions:
    """
    Args:
        max_iterations: coordinate-descent sweeps per lasso solve
        tolerance: relative parameter change accepted as converged
        admm_rho: ADMM penalty for single-objective splits (fine-tuning)
        admm_rho1: consensus penalty of the joint selection problem
        admm_rho2: linearization penalty of the quadratic-approximation splits
        residual_abs: absolute primal/dual residual tolerance (epsilon_abs)
        residual_rel: relative primal/dual residual tolerance (epsilon_rel)
        max_outer_iterations: quadratic-approximation outer steps
        admm_max_iterations: inner ADMM sweeps per outer or DC step
    """

    max_iterations: int = 1000
    tolerance: float = 1e-6
    admm_rho: float = 1.0
    admm_rho1: float = 1.0
    admm_rho2: float = 1.0
    residual_abs: float = 1e-6
    residual_rel: float = 1e-4
    max_outer_iterations: int = 100
    admm_max_iterations: int = 500

    def __post_init__(self) -> None:
        for name in ("max_iterations", "max_outer_iterations", "admm_max_iterations"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"SolverOptions.{name} must be an integer >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        for name in (
            "tolerance",
            "admm_rho",
            "admm_rho1",
            "admm_rho2",
            "residual_abs",
            "residual_rel",
        ):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"SolverOptions.{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SolverOptions":
        return from_mapping(cls, data, "solver")

    @classmethod
    def from_env(cls) -> "SolverOptions":
        overrides: Dict[str, Any] = {}
        if os.getenv("TLMEST_MAX_ITERATIONS"):
            overrides["max_iterations"] = int(os.environ["TLMEST_MAX_ITERATIONS"])
        if os.getenv("TLMEST_TOLERANCE"):
            overrides["tolerance"] = float(os.environ["TLMEST_TOLERANCE"])
        return cls(**overrides)

    def with_overrides(self, **changes: Any) -> "SolverOptions":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
