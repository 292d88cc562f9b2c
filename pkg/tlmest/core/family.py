"""GLM loss families with canonical links."""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.special import expit


class LossFamily(str, Enum):
    """Cumulant b and its first two derivatives.

    SQUARED_IDENTITY: b(x) = x^2/2, identity link.
    LOGISTIC_LOGIT: b(x) = log(1 + e^x), logit link.
    """

    SQUARED_IDENTITY = "squared"
    LOGISTIC_LOGIT = "logit"

    def cumulant(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=np.float64)
        if self is LossFamily.SQUARED_IDENTITY:
            return 0.5 * eta * eta
        # log(1 + e^x) split on the sign of x so exp never overflows
        return np.where(
            eta > 0,
            eta + np.log1p(np.exp(-np.abs(eta))),
            np.log1p(np.exp(-np.abs(eta))),
        )

    def mean(self, eta: np.ndarray) -> np.ndarray:
        """b'(eta), the inverse link."""
        eta = np.asarray(eta, dtype=np.float64)
        if self is LossFamily.SQUARED_IDENTITY:
            return eta.copy()
        return expit(eta)

    def variance(self, eta: np.ndarray) -> np.ndarray:
        """b''(eta)."""
        eta = np.asarray(eta, dtype=np.float64)
        if self is LossFamily.SQUARED_IDENTITY:
            return np.ones_like(eta)
        mu = expit(eta)
        return mu * (1.0 - mu)

    @classmethod
    def parse(cls, value: "str | LossFamily") -> "LossFamily":
        if isinstance(value, LossFamily):
            return value
        aliases = {
            "squared": cls.SQUARED_IDENTITY,
            "squared_identity": cls.SQUARED_IDENTITY,
            "identity": cls.SQUARED_IDENTITY,
            "linear": cls.SQUARED_IDENTITY,
            "logit": cls.LOGISTIC_LOGIT,
            "logistic": cls.LOGISTIC_LOGIT,
            "logistic_logit": cls.LOGISTIC_LOGIT,
        }
        key = str(value).strip().lower()
        if key not in aliases:
            from tlmest.common.errors import InvalidInputError

            raise InvalidInputError(f"unknown loss family {value!r}")
        return aliases[key]
