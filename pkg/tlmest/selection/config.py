"""Settings of the truncated-penalty joint estimator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Sequence, Union

import numpy as np

from tlmest.common.errors import ConfigError, InvalidInputError
from tlmest.common.schema import check_keys
from tlmest.core import Regularizer
from tlmest.solvers import SolverOptions

DEFAULT_MAX_DC_ITERATIONS = 50
DEFAULT_DC_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SelectionConfig:
    """
    Args:
        lambda_pool: lambda_P, applied to every dataset's own penalty
        lambda_q: lambda_Q per source; a scalar is shared by all sources
        tau: truncation level of min(R(theta_k - theta_0), tau)
        regularizer: l1 for sparse vectors, nuclear for low-rank matrices
        solver: ADMM penalties, residual tolerances and sweep caps
        max_dc_iterations: cap on convex upper-model solves
        dc_tolerance: relative objective decrease treated as stalled
    """

    lambda_pool: float
    lambda_q: Union[float, Sequence[float]]
    tau: float
    regularizer: Regularizer = field(default_factory=Regularizer.l1)
    solver: SolverOptions = field(default_factory=SolverOptions)
    max_dc_iterations: int = DEFAULT_MAX_DC_ITERATIONS
    dc_tolerance: float = DEFAULT_DC_TOLERANCE

    def __post_init__(self) -> None:
        lam = float(self.lambda_pool)
        if not np.isfinite(lam) or lam < 0:
            raise ConfigError(f"lambda_pool must be finite and >= 0, got {self.lambda_pool}")
        tau = float(self.tau)
        if not np.isfinite(tau) or tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        lq = np.atleast_1d(np.asarray(self.lambda_q, dtype=np.float64))
        if lq.ndim != 1 or lq.size == 0:
            raise ConfigError("lambda_q must be a number or a nonempty list")
        if not np.all(np.isfinite(lq)) or np.any(lq < 0):
            raise ConfigError("lambda_q entries must be finite and >= 0")
        if int(self.max_dc_iterations) != self.max_dc_iterations or self.max_dc_iterations < 1:
            raise ConfigError("max_dc_iterations must be an integer >= 1")
        if self.dc_tolerance <= 0:
            raise ConfigError("dc_tolerance must be positive")
        object.__setattr__(self, "lambda_pool", lam)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "lambda_q", tuple(float(v) for v in lq))
        object.__setattr__(self, "regularizer", Regularizer.parse(self.regularizer))
        object.__setattr__(self, "max_dc_iterations", int(self.max_dc_iterations))

    def lambda_q_for(self, sources: int) -> np.ndarray:
        """lambda_Q broadcast to one entry per source."""
        if sources < 1:
            raise InvalidInputError("selection needs at least one source dataset")
        lq = np.asarray(self.lambda_q, dtype=np.float64)
        if lq.size == 1:
            return np.full(sources, lq[0])
        if lq.size != sources:
            raise InvalidInputError(f"{lq.size} lambda_q values for {sources} sources")
        return lq

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SelectionConfig":
        check_keys(cls, data, "selection")
        values: Dict[str, Any] = dict(data)
        for required in ("lambda_pool", "lambda_q", "tau"):
            if required not in values:
                raise ConfigError(f"selection.{required} is required")
        if isinstance(values.get("solver"), Mapping):
            values["solver"] = SolverOptions.from_dict(values["solver"])
        try:
            return cls(**values)
        except (InvalidInputError, TypeError, ValueError) as e:
            raise ConfigError(f"selection: {e}") from e
