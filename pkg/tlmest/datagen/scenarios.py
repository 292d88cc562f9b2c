"""Seeded generators for the simulated transfer studies."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from tlmest.common.errors import InvalidInputError, ShapeMismatchError
from tlmest.core import Dataset, LossFamily, Parameter, as_parameter
from tlmest.solvers import solve_pd

from .config import CoeffFamily, Design, ScenarioConfig
from .ensembles import (
    cholesky_factor,
    gaussian_rows,
    goe_matrix,
    haar_columns,
    matrix_normal,
    perturbed_covariances,
    unit_vector,
    wishart_factor,
)
from .seeding import COEFFICIENTS, COVARIATES, GOE, NOISE, RESPONSES, substream

logger = logging.getLogger(__name__)


@dataclass
class GeneratedStudy:
    """Target (index 0) and sources with the coefficients that generated them.

    ``true_informative`` comes from the recipe, not from coefficient distances.
    """

    config: ScenarioConfig
    datasets: List[Dataset]
    true_coeffs: List[Parameter]
    true_informative: List[bool]
    covariances: Optional[List[np.ndarray]] = field(default=None, repr=False)

    @property
    def target(self) -> Dataset:
        return self.datasets[0]

    @property
    def sources(self) -> List[Dataset]:
        return self.datasets[1:]

    def informative_pool(self) -> List[Dataset]:
        """The target followed by the truly informative sources."""
        return [self.datasets[0]] + [
            d for d, keep in zip(self.datasets[1:], self.true_informative) if keep
        ]

    def population_pooled(self, informative_only: bool = True) -> Parameter:
        if self.covariances is None:
            raise InvalidInputError("population pooled parameter needs linear-design covariances")
        flags = self.true_informative if informative_only else [True] * len(self.sources)
        chosen = [0] + [k + 1 for k, flag in enumerate(flags) if flag]
        return population_pooled_linear(
            [self.covariances[k] for k in chosen],
            [self.true_coeffs[k] for k in chosen],
            [self.datasets[k].n for k in chosen],
            [self.datasets[k].weight for k in chosen],
        )


def _choose(rng: np.random.Generator, p: int, size: int) -> np.ndarray:
    return rng.choice(p, size=min(size, p), replace=False)


def _sparse_coefficients(cfg: ScenarioConfig) -> Tuple[List[np.ndarray], List[bool]]:
    rng = substream(cfg.seed, COEFFICIENTS)
    p, s = cfg.p, cfg.support
    base = np.zeros(p)
    family = cfg.coeff_family
    base[:s] = 0.5 if family is CoeffFamily.H_SWEEP else 0.4
    coeffs = [base]
    informative: List[bool] = []
    for k in range(cfg.sources):
        useful = family is CoeffFamily.H_SWEEP or k < cfg.informative_count
        theta = base.copy()
        if family is CoeffFamily.L0:
            chosen = _choose(rng, p, 3 if useful else 2 * s)
            chosen = chosen[chosen != 0]
            theta[chosen] -= 0.4 if useful else 0.6
            theta[0] = -0.4
        elif family is CoeffFamily.L1:
            chosen = _choose(rng, p, p // 2)
            theta[chosen] += rng.laplace(0.0, 0.04 if useful else 0.2, size=chosen.size)
            theta[0] = -0.4
        else:
            chosen = _choose(rng, p, p // 2)
            chosen = chosen[chosen != 0]
            theta[chosen] += rng.laplace(0.0, 0.06 * cfg.contrast_level, size=chosen.size)
            theta[0] = max(0.5 - 0.1 * cfg.contrast_level, -1.0)
        coeffs.append(theta)
        informative.append(useful)
    return coeffs, informative


def gen_linear_scenario(cfg: ScenarioConfig) -> GeneratedStudy:
    """Vector-coefficient study with y = <theta_k, X> + N(0, 1) noise."""
    if cfg.is_matrix:
        raise InvalidInputError("gen_linear_scenario needs a vector coefficient recipe")
    coeffs, informative = _sparse_coefficients(cfg)
    p = cfg.p
    if cfg.design is Design.GOE:
        z = goe_matrix(p, substream(cfg.seed, GOE))
        perturbed = perturbed_covariances(p, cfg.goe_c, cfg.sources, z)

    datasets: List[Dataset] = []
    covariances: List[np.ndarray] = []
    for k, n in enumerate(cfg.sizes):
        rng = substream(cfg.seed, COVARIATES, k)
        if cfg.design is Design.HOMO:
            sigma = np.eye(p)
            x = rng.standard_normal((n, p))
        elif cfg.design is Design.HETERO:
            factor = wishart_factor(p, 2.0 / (3.0 * p), rng)
            sigma = factor.T @ factor
            x = gaussian_rows(n, factor, rng)
        else:
            sigma = perturbed[k]
            x = rng.standard_normal((n, p)) @ cholesky_factor(sigma)
        noise = substream(cfg.seed, NOISE, k).standard_normal(n)
        datasets.append(Dataset(x, x @ coeffs[k] + noise, family=LossFamily.SQUARED_IDENTITY))
        covariances.append(sigma)

    return GeneratedStudy(
        config=cfg,
        datasets=datasets,
        true_coeffs=[Parameter(c) for c in coeffs],
        true_informative=informative,
        covariances=covariances,
    )


def _low_rank_coefficients(cfg: ScenarioConfig) -> Tuple[List[np.ndarray], List[bool]]:
    rng = substream(cfg.seed, COEFFICIENTS)
    d1, d2, r = cfg.d1, cfg.d2, cfg.rank
    base = haar_columns(d1, r, rng) @ haar_columns(d2, r, rng).T
    u, v = unit_vector(d1, rng), unit_vector(d2, rng)
    shared = np.outer(u, v)
    coeffs = [base]
    informative: List[bool] = []
    for k in range(cfg.sources):
        useful = k < cfg.informative_count
        contrast = haar_columns(d1, 2 * r, rng) @ haar_columns(d2, 2 * r, rng).T
        coeffs.append(base + (contrast / r if useful else contrast) + shared)
        informative.append(useful)
    return coeffs, informative


def gen_trace_scenario(cfg: ScenarioConfig) -> GeneratedStudy:
    """Low-rank matrix study with matrix-normal covariates, identity or logit link."""
    if not cfg.is_matrix:
        raise InvalidInputError("gen_trace_scenario needs the low_rank coefficient recipe")
    if cfg.design is Design.GOE:
        raise InvalidInputError("the GOE design is only defined for vector coefficients")
    coeffs, informative = _low_rank_coefficients(cfg)
    d1, d2 = cfg.d1, cfg.d2
    logit = cfg.family is LossFamily.LOGISTIC_LOGIT

    datasets: List[Dataset] = []
    for k, n in enumerate(cfg.sizes):
        rng = substream(cfg.seed, COVARIATES, k)
        if cfg.design is Design.HETERO:
            share = 2.0 / 3.0 if logit else 1.0
            left = wishart_factor(d1, share / d1, rng).T
            right = wishart_factor(d2, share / d2, rng).T
            x = matrix_normal(n, left, right, rng)
        else:
            x = rng.standard_normal((n, d1, d2))
        eta = np.einsum("nij,ij->n", x, coeffs[k])
        if logit:
            draws = substream(cfg.seed, RESPONSES, k).random(n)
            y = (draws < expit(eta)).astype(np.float64)
        else:
            y = eta + substream(cfg.seed, NOISE, k).standard_normal(n)
        datasets.append(Dataset(x, y, family=cfg.family))

    return GeneratedStudy(
        config=cfg,
        datasets=datasets,
        true_coeffs=[Parameter(c) for c in coeffs],
        true_informative=informative,
    )


def generate(cfg: ScenarioConfig) -> GeneratedStudy:
    return gen_trace_scenario(cfg) if cfg.is_matrix else gen_linear_scenario(cfg)


def population_pooled_linear(
    covariances: Sequence[np.ndarray],
    thetas: Sequence[Parameter],
    sizes: Sequence[int],
    weights: Optional[Sequence[float]] = None,
) -> Parameter:
    """theta_P = (sum w_k n_k Sigma_k)^{-1} sum w_k n_k Sigma_k theta_k."""
    if not (len(covariances) == len(thetas) == len(sizes)) or len(thetas) == 0:
        raise ShapeMismatchError("covariances, coefficients and sizes must align and be nonempty")
    weights = [1.0] * len(thetas) if weights is None else list(weights)
    p = covariances[0].shape[0]
    total = np.zeros((p, p))
    rhs = np.zeros(p)
    for sigma, theta, n, w in zip(covariances, thetas, sizes, weights):
        vec = as_parameter(theta).values
        if sigma.shape != (p, p) or vec.shape != (p,):
            raise ShapeMismatchError("population pooling needs matching p x p covariances")
        total += w * n * sigma
        rhs += w * n * (sigma @ vec)
    return Parameter(solve_pd(0.5 * (total + total.T), rhs))


def almost_homogeneous_gap(p: int, c: float, h: float, seed: int) -> Tuple[float, float]:
    """
    l1 distance between the population pooled parameter and the target parameter for
    three equal-size studies whose covariances are I, I + cZ and I - cZ, against the same
    distance when all three covariances are I. Contrasts are delta_1 = -delta_2 = h e_1.
    """
    z = goe_matrix(p, substream(seed, GOE))
    target = np.zeros(p)
    delta = np.zeros(p)
    delta[0] = h
    thetas = [Parameter(target), Parameter(target - delta), Parameter(target + delta)]
    sizes = [1, 1, 1]
    hetero = population_pooled_linear(perturbed_covariances(p, c, 2, z), thetas, sizes)
    homo = population_pooled_linear([np.eye(p)] * 3, thetas, sizes)
    return (
        float(np.abs(hetero.values - target).sum()),
        float(np.abs(homo.values - target).sum()),
    )
