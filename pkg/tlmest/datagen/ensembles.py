"""Random matrix ensembles and covariate laws used by the simulated studies."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from tlmest.common.errors import InvalidInputError, NumericError

from .seeding import GOE, substream


def goe_matrix(p: int, rng: np.random.Generator) -> np.ndarray:
    """Symmetric matrix, diagonal N(0, 2/p), off-diagonal N(0, 1/p)."""
    if p < 1:
        raise InvalidInputError(f"p must be >= 1, got {p}")
    upper = np.triu(rng.standard_normal((p, p)) / np.sqrt(p), k=1)
    diag = rng.standard_normal(p) * np.sqrt(2.0 / p)
    return upper + upper.T + np.diag(diag)


def gen_goe(p: int, seed: int) -> np.ndarray:
    return goe_matrix(p, substream(seed, GOE))


def haar_columns(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rows x cols matrix with orthonormal columns."""
    if cols > rows:
        raise InvalidInputError(f"cannot draw {cols} orthonormal columns in dimension {rows}")
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def wishart_factor(p: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Lambda of shape (1.5p, p) scaled so that Sigma = factor^T factor = scale Lambda^T Lambda."""
    rows = int(round(1.5 * p))
    return np.sqrt(scale) * rng.standard_normal((rows, p))


def gaussian_rows(n: int, factor: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """n rows with covariance factor^T factor, drawn as G @ factor."""
    return rng.standard_normal((n, factor.shape[0])) @ factor


def cholesky_factor(sigma: np.ndarray) -> np.ndarray:
    """Upper factor R with R^T R = sigma."""
    try:
        return cholesky(sigma, lower=False)
    except LinAlgError as e:
        raise NumericError(f"covariance is not positive definite: {e}") from e


def matrix_normal(
    n: int, left: np.ndarray, right: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """n draws of A1 G A2^T with Sigma_1 = A1 A1^T and Sigma_2 = A2 A2^T."""
    g = rng.standard_normal((n, left.shape[1], right.shape[1]))
    return np.einsum("ia,nab,jb->nij", left, g, right, optimize=True)


def perturbed_covariances(
    p: int, c: float, sources: int, z: np.ndarray
) -> Tuple[np.ndarray, ...]:
    """Sigma_0 = I and sources alternating I + cZ, I - cZ."""
    eye = np.eye(p)
    return (eye, *[eye + (c if k % 2 == 0 else -c) * z for k in range(sources)])
