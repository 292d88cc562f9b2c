"""Shared fixtures: seeded generators and small studies."""

from __future__ import annotations

import numpy as np
import pytest

from tlmest.core import Dataset, LossFamily


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def linear_dataset(
    rng: np.random.Generator, n: int, theta: np.ndarray, noise: float = 0.5, weight: float = 1.0
) -> Dataset:
    x = rng.standard_normal((n, theta.size))
    y = x @ theta + noise * rng.standard_normal(n)
    return Dataset(x, y, weight=weight)


def trace_dataset(
    rng: np.random.Generator,
    n: int,
    theta: np.ndarray,
    family: LossFamily = LossFamily.SQUARED_IDENTITY,
    noise: float = 0.5,
) -> Dataset:
    x = rng.standard_normal((n, *theta.shape))
    eta = np.einsum("nij,ij->n", x, theta)
    if family is LossFamily.LOGISTIC_LOGIT:
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    else:
        y = eta + noise * rng.standard_normal(n)
    return Dataset(x, y, family=family)


@pytest.fixture
def sparse_theta() -> np.ndarray:
    theta = np.zeros(10)
    theta[:3] = [1.5, -1.0, 0.8]
    return theta


@pytest.fixture
def small_linear(rng, sparse_theta) -> Dataset:
    return linear_dataset(rng, 80, sparse_theta)


@pytest.fixture
def low_rank_theta(rng) -> np.ndarray:
    u = rng.standard_normal((4, 1))
    v = rng.standard_normal((3, 1))
    return u @ v.T


@pytest.fixture
def small_trace(rng, low_rank_theta) -> Dataset:
    return trace_dataset(rng, 120, low_rank_theta)
