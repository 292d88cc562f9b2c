"""GLM losses L_k(theta) = (1/n_k) sum_i [-y_i eta_i + b(eta_i)] and their pooled sums."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from tlmest.common.config import get_settings
from tlmest.common.errors import CapacityError, InvalidInputError

from .dataset import Dataset, check_compatible
from .family import LossFamily
from .parameter import Parameter


class WeightedObjective:
    """(1/scale) * sum over stacked rows of w_i [-y_i eta_i + b(eta_i)].

    eta_i = <theta, X_i> + offset_i. The pooled objective of the weighted-pooling step uses
    w_i = alpha_k and scale = n_P; a single study uses w_i = 1 and scale = n_k. The offset
    shifts the linear predictor by a fixed parameter, which is how fine-tuning evaluates
    L_0(theta_P + delta) as a function of delta.
    """

    def __init__(
        self,
        design: np.ndarray,
        responses: np.ndarray,
        row_weights: np.ndarray,
        family: LossFamily,
        scale: float,
        param_shape: Tuple[int, ...],
        offset: Optional[np.ndarray] = None,
    ):
        if scale <= 0:
            raise InvalidInputError(f"objective scale must be positive, got {scale}")
        self.design = design
        self.responses = responses
        self.row_weights = row_weights
        self.family = family
        self.scale = float(scale)
        self.param_shape = param_shape
        self.offset = offset

    @classmethod
    def pooled(
        cls, datasets: Sequence[Dataset], shift: Optional[Parameter] = None
    ) -> "WeightedObjective":
        shape, family = check_compatible(datasets)
        design = np.vstack([d.design for d in datasets])
        responses = np.concatenate([d.responses for d in datasets])
        weights = np.concatenate([np.full(d.n, d.weight) for d in datasets])
        n_pool = float(sum(d.n for d in datasets))
        offset = None if shift is None else design @ datasets[0].check_parameter(shift)
        return cls(design, responses, weights, family, n_pool, shape, offset)

    @classmethod
    def single(
        cls, d: Dataset, weighted: bool = False, shift: Optional[Parameter] = None
    ) -> "WeightedObjective":
        weights = np.full(d.n, d.weight if weighted else 1.0)
        offset = None if shift is None else d.linear_predictor(shift)
        return cls(d.design, d.responses, weights, d.family, float(d.n), d.param_shape, offset)

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    def eta(self, theta_vec: np.ndarray) -> np.ndarray:
        eta = self.design @ theta_vec
        if self.offset is not None:
            eta = eta + self.offset
        return eta

    def value(self, theta_vec: np.ndarray) -> float:
        eta = self.eta(theta_vec)
        terms = -self.responses * eta + self.family.cumulant(eta)
        return float(np.dot(self.row_weights, terms) / self.scale)

    def gradient(self, theta_vec: np.ndarray) -> np.ndarray:
        eta = self.eta(theta_vec)
        resid = self.row_weights * (self.family.mean(eta) - self.responses)
        return self.design.T @ resid / self.scale

    def hessian(self, theta_vec: np.ndarray, cap: Optional[int] = None) -> np.ndarray:
        cap = get_settings().hessian_cap if cap is None else cap
        if self.dim > cap:
            raise CapacityError(
                f"dense Hessian needs {self.dim} vec-coordinates, above the cap of {cap}"
            )
        curvature = self.row_weights * self.family.variance(self.eta(theta_vec))
        hess = (self.design.T * curvature) @ self.design / self.scale
        return 0.5 * (hess + hess.T)


def _vec(d: Dataset, theta: Union[Parameter, np.ndarray]) -> np.ndarray:
    return d.check_parameter(theta)


def glm_loss(d: Dataset, theta: Union[Parameter, np.ndarray]) -> float:
    return WeightedObjective.single(d).value(_vec(d, theta))


def glm_gradient(d: Dataset, theta: Union[Parameter, np.ndarray]) -> Parameter:
    grad = WeightedObjective.single(d).gradient(_vec(d, theta))
    return Parameter(grad.reshape(d.param_shape))


def glm_hessian_vec(
    d: Dataset, theta: Union[Parameter, np.ndarray], cap: Optional[int] = None
) -> np.ndarray:
    return WeightedObjective.single(d).hessian(_vec(d, theta), cap=cap)
