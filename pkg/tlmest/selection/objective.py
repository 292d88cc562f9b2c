"""The truncated-penalty objective, its convex upper model and the informative-set rule."""

from __future__ import annotations

from typing import List, Sequence, Union

import numpy as np

from tlmest.common.errors import InvalidInputError
from tlmest.core import Dataset, Parameter, Regularizer, WeightedObjective


def _array(theta: Union[Parameter, np.ndarray]) -> np.ndarray:
    return theta.values if isinstance(theta, Parameter) else np.asarray(theta, dtype=np.float64)


class TruncatedObjective:
    """S(Theta) = sum_k alpha_k n_k L_k(theta_k) + sum_k n_k lambda_P R(theta_k)
    + sum_{k>=1} n_k lambda_Qk min(R(theta_0 - theta_k), tau).

    This is N times the averaged objective; delta_k is always taken as theta_0 - theta_k.
    """

    def __init__(
        self,
        datasets: Sequence[Dataset],
        lambda_pool: float,
        lambda_q: np.ndarray,
        tau: float,
        regularizer: Regularizer,
    ):
        if len(datasets) < 2:
            raise InvalidInputError("selection needs the target and at least one source")
        self.datasets = list(datasets)
        self.losses = [WeightedObjective.single(d) for d in datasets]
        self.sizes = np.array([d.n for d in datasets], dtype=np.float64)
        self.weights = np.array([d.weight for d in datasets], dtype=np.float64)
        self.lambda_pool = float(lambda_pool)
        self.lambda_q = np.asarray(lambda_q, dtype=np.float64)
        self.tau = float(tau)
        self.regularizer = regularizer

    def _common(self, theta: Sequence[np.ndarray]) -> float:
        total = 0.0
        for k, t in enumerate(theta):
            flat = t.reshape(-1)
            total += self.weights[k] * self.sizes[k] * self.losses[k].value(flat)
            total += self.sizes[k] * self.lambda_pool * self.regularizer.norm(t)
        return total

    def contrasts(self, theta: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([self.regularizer.norm(theta[0] - t) for t in theta[1:]])

    def value(self, theta: Sequence[np.ndarray]) -> float:
        capped = np.minimum(self.contrasts(theta), self.tau)
        return self._common(theta) + float(np.sum(self.sizes[1:] * self.lambda_q * capped))

    def upper(self, theta: Sequence[np.ndarray], truncated: Sequence[bool]) -> float:
        """Convex upper model: contrasts of truncated sources are charged tau."""
        norms = self.contrasts(theta)
        charged = np.where(np.asarray(truncated, dtype=bool), self.tau, norms)
        return self._common(theta) + float(np.sum(self.sizes[1:] * self.lambda_q * charged))

    def indicators(self, theta: Sequence[np.ndarray]) -> List[bool]:
        """I(R(delta_k) >= tau); a tie counts as truncated."""
        return [bool(v >= self.tau) for v in self.contrasts(theta)]


def identify_informative(
    thetas: Sequence[Union[Parameter, np.ndarray]], tau: float, r: Regularizer
) -> List[bool]:
    """flag[k] = R(theta_k - theta_0) <= tau for each source k = 1..K."""
    if not tau > 0:
        raise InvalidInputError(f"tau must be positive, got {tau}")
    if len(thetas) < 2:
        raise InvalidInputError("need the target estimate and at least one source estimate")
    base = _array(thetas[0])
    return [bool(r.norm(_array(t) - base) <= tau) for t in thetas[1:]]
