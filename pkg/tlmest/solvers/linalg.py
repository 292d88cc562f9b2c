"""Symmetric positive-definite solves via Cholesky."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from tlmest.common.errors import InvalidInputError, NumericError


class PDFactor:
    """Cholesky factorization of a symmetric PD matrix, reused across right-hand sides."""

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a))))
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-10 * scale):
            raise NumericError("matrix is not symmetric")
        try:
            self._factor = cho_factor(a, lower=False, check_finite=False)
        except LinAlgError as e:
            raise NumericError(f"matrix is not positive definite: {e}") from e
        self.dim = a.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.dim:
            raise InvalidInputError(f"right-hand side has {b.shape[0]} rows, expected {self.dim}")
        return cho_solve(self._factor, b, check_finite=False)


def solve_pd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return PDFactor(a).solve(b)
