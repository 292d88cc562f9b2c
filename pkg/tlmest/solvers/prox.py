"""Proximal maps of the l1 and nuclear norms."""

from __future__ import annotations

import numpy as np

from tlmest.common.errors import InvalidInputError, NumericError


def _check_threshold(a: float) -> float:
    a = float(a)
    if not np.isfinite(a) or a < 0:
        raise InvalidInputError(f"threshold must be finite and >= 0, got {a}")
    return a


def prox_l1(b: np.ndarray, a: float) -> np.ndarray:
    """Soft threshold: (|b_i| - a)_+ sign(b_i), elementwise."""
    a = _check_threshold(a)
    b = np.asarray(b, dtype=np.float64)
    return np.sign(b) * np.maximum(np.abs(b) - a, 0.0)


def soft_threshold(value: float, a: float) -> float:
    """Scalar soft threshold for the coordinate-descent inner loop."""
    if value > a:
        return value - a
    if value < -a:
        return value + a
    return 0.0


def svd_shrink(y: np.ndarray, lam: float) -> np.ndarray:
    """Singular value shrinkage U diag((sigma_i - lam)_+) V^T."""
    lam = _check_threshold(lam)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise InvalidInputError(f"svd_shrink needs a matrix, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NumericError("svd_shrink: input has non-finite entries")
    if lam == 0.0:
        return y.copy()
    try:
        u, s, vt = np.linalg.svd(y, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"SVD failed: {e}") from e
    shrunk = np.maximum(s - lam, 0.0)
    keep = shrunk > 0
    if not np.any(keep):
        return np.zeros_like(y)
    return (u[:, keep] * shrunk[keep]) @ vt[keep]
