"""
Named estimators compared in the simulation studies.

Every estimator maps an ``EstimationContext`` (one generated study plus the replication's
seed and tuning settings) to an ``Estimate``. Tuning quantities shared by several
estimators (the cross-validated target and pool penalties, the truncated fit) are computed
once per context and cached on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from tlmest.common.errors import ConfigError, InvalidInputError, UnsupportedModelError
from tlmest.common.schema import check_keys
from tlmest.core import Dataset, Parameter, Regularizer, concat_datasets
from tlmest.datagen import GeneratedStudy, replication_seed
from tlmest.selection import SelectionConfig, SelectionFit, per_dataset_fits, select
from tlmest.solvers import SolverOptions, fit_single, fit_weighted
from tlmest.transfer import fine_tune_cv
from tlmest.tuning import (
    LambdaPolicy,
    TuningGrid,
    apply_policy,
    cv_select,
    default_grid,
    grid_select,
    lambda_max,
    target_holdout_score,
)

logger = logging.getLogger(__name__)

# tuning seed tags, fanned out from the replication seed
CV_TARGET = 0
CV_POOL = 1
FINETUNE = 2
HOLDOUT = 3


@dataclass(frozen=True)
class EstimatorSettings:
    """
    Args:
        cv_folds: folds of every cross validation
        cv_grid_size: log-spaced penalty levels tried by each cross validation
        lambda_q_factors: lambda_Q candidates as multiples of the truncated lambda_P
        tau_factors: tau candidates as multiples of the median initial contrast norm
        tau_grid: absolute tau candidates; replaces tau_factors when given
        holdout_fraction: target share held out to score (lambda_Q, tau) cells
        max_dc_iterations: cap on DC steps of the truncated estimator
        solver: options passed to every solver; environment overrides apply when omitted
    """

    cv_folds: int = 5
    cv_grid_size: int = 20
    lambda_q_factors: Tuple[float, ...] = (0.5, 1.0, 2.0)
    tau_factors: Tuple[float, ...] = (0.5, 1.0, 2.0)
    tau_grid: Optional[Tuple[float, ...]] = None
    holdout_fraction: float = 0.2
    max_dc_iterations: int = 50
    solver: SolverOptions = field(default_factory=SolverOptions.from_env)

    def __post_init__(self) -> None:
        if self.cv_folds < 2 or self.cv_grid_size < 1:
            raise ConfigError("cv_folds must be >= 2 and cv_grid_size >= 1")
        for name in ("lambda_q_factors", "tau_factors", "tau_grid"):
            values = getattr(self, name)
            if values is None:
                continue
            values = tuple(float(v) for v in values)
            if not values or min(values) <= 0:
                raise ConfigError(f"{name} must be a nonempty list of positive numbers")
            object.__setattr__(self, name, values)

    def to_dict(self) -> Dict[str, Any]:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values["lambda_q_factors"] = list(self.lambda_q_factors)
        values["tau_factors"] = list(self.tau_factors)
        values["tau_grid"] = None if self.tau_grid is None else list(self.tau_grid)
        values["solver"] = self.solver.to_dict()
        return values

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EstimatorSettings":
        check_keys(cls, data, "estimators")
        values = dict(data)
        if isinstance(values.get("solver"), Mapping):
            values["solver"] = SolverOptions.from_dict(values["solver"])
        try:
            return cls(**values)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"estimators: {e}") from e


@dataclass
class Estimate:
    """An estimate of the target parameter; ``flags`` are informative-source calls."""

    theta: Parameter
    flags: Optional[List[bool]] = None
    converged: bool = True
    details: Dict[str, Any] = field(default_factory=dict)


class EstimationContext:
    """One replication's study with lazily computed, shared tuning results."""

    def __init__(self, study: GeneratedStudy, seed: int, settings: EstimatorSettings):
        self.study = study
        self.seed = int(seed)
        self.settings = settings

    def tuning_seed(self, tag: int) -> int:
        return replication_seed(self.seed, tag)

    @property
    def target(self) -> Dataset:
        return self.study.target

    @property
    def truth(self) -> Parameter:
        return self.study.true_coeffs[0]

    @cached_property
    def regularizer(self) -> Regularizer:
        return Regularizer.nuclear() if self.target.is_matrix else Regularizer.l1()

    @property
    def oracle_pool(self) -> List[Dataset]:
        return self.study.informative_pool()

    @property
    def everything(self) -> List[Dataset]:
        return list(self.study.datasets)

    def _cv_lambda(self, data: Dataset, tag: int) -> float:
        r, opts = self.regularizer, self.settings.solver

        def fitter(train: Dataset, lam: float) -> Parameter:
            return fit_single(train, r, lam, opts).parameter

        top = lambda_max([data], r)
        if top <= 0:
            return 0.0
        grid = TuningGrid(
            default_grid(top, num=self.settings.cv_grid_size), folds=self.settings.cv_folds
        )
        return cv_select(data, fitter, grid, self.tuning_seed(tag)).lam

    @cached_property
    def lambda_vanilla(self) -> float:
        """lambda_v: cross-validated on the target alone."""
        lam = self._cv_lambda(self.target, CV_TARGET)
        logger.debug("lambda_v=%.6g", lam)
        return lam

    @cached_property
    def lambda_pool_cv(self) -> float:
        """Cross-validated on all rows of the target and the informative sources."""
        lam = self._cv_lambda(concat_datasets(self.oracle_pool), CV_POOL)
        logger.debug("cross-validated lambda_P=%.6g", lam)
        return lam

    def lambda_for(self, policy: LambdaPolicy) -> float:
        # only the inputs the policy reads are tuned
        pool_cv = self.lambda_pool_cv if policy is not LambdaPolicy.HALF_VANILLA else 0.0
        vanilla = self.lambda_vanilla if policy is not LambdaPolicy.CV else 0.0
        return apply_policy(policy, pool_cv, vanilla)

    def pooled(self, datasets: Sequence[Dataset], policy: LambdaPolicy) -> Estimate:
        lam = self.lambda_for(policy)
        fit = fit_weighted(datasets, self.regularizer, lam, self.settings.solver)
        if not fit.converged:
            logger.warning("pooled fit (%s) did not converge", policy.value)
        return Estimate(fit.parameter, converged=fit.converged, details={"lambda_pool": lam})

    def finetuned(self, primal: Estimate) -> Estimate:
        step = fine_tune_cv(
            self.target,
            primal.theta,
            self.regularizer,
            self.settings.solver,
            folds=self.settings.cv_folds,
            grid_size=self.settings.cv_grid_size,
            seed=self.tuning_seed(FINETUNE),
        )
        return Estimate(
            step.theta,
            flags=primal.flags,
            converged=primal.converged and step.converged,
            details={**primal.details, "zeta": step.details.get("zeta")},
        )

    def _selection_config(self, lambda_q: float, tau: float) -> SelectionConfig:
        return SelectionConfig(
            lambda_pool=self.lambda_for(LambdaPolicy.HALF_VANILLA),
            lambda_q=lambda_q,
            tau=tau,
            regularizer=self.regularizer,
            solver=self.settings.solver,
            max_dc_iterations=self.settings.max_dc_iterations,
        )

    def tau_candidates(self) -> Tuple[float, ...]:
        if self.settings.tau_grid is not None:
            return self.settings.tau_grid
        probe = self._selection_config(1.0, 1.0)
        fits = per_dataset_fits(self.everything, probe)
        distances = [self.regularizer.norm(fits[0] - t) for t in fits[1:]]
        scale = float(np.median(distances))
        if scale <= 0:
            scale = 1.0
        return tuple(f * scale for f in self.settings.tau_factors)

    @cached_property
    def selection(self) -> SelectionFit:
        """The truncated joint fit with (lambda_Q, tau) picked on a target hold-out."""
        lambda_p = self.lambda_for(LambdaPolicy.HALF_VANILLA)
        lq_grid = [f * max(lambda_p, 1e-12) for f in self.settings.lambda_q_factors]
        tau_grid = self.tau_candidates()
        sources = self.study.sources

        def score(_: Any, lambda_q: float, tau: float) -> float:
            cfg = self._selection_config(lambda_q, tau)
            return target_holdout_score(
                self.target,
                lambda train: select([train, *sources], cfg).primal,
                seed=self.tuning_seed(HOLDOUT),
                holdout_fraction=self.settings.holdout_fraction,
            )

        if len(lq_grid) * len(tau_grid) == 1:
            lambda_q, tau = lq_grid[0], tau_grid[0]
        else:
            choice = grid_select(None, score, lq_grid, tau_grid)
            lambda_q, tau = choice.lambda_q, choice.tau
        logger.debug("truncated estimator uses lambda_Q=%.6g tau=%.6g", lambda_q, tau)
        fit = select(self.everything, self._selection_config(lambda_q, tau))
        fit.details.update(lambda_q=lambda_q, tau=tau, lambda_pool=lambda_p)
        return fit


Estimator = Callable[[EstimationContext], Estimate]


class EstimatorRegistry:
    """Name -> estimator function lookup."""

    def __init__(self):
        self.estimators: Dict[str, Estimator] = {}

    def register(self, name: str) -> Callable[[Estimator], Estimator]:
        def decorator(func: Estimator) -> Estimator:
            self.estimators[name] = func
            return func

        return decorator

    def get(self, name: str) -> Estimator:
        try:
            return self.estimators[name]
        except KeyError:
            known = ", ".join(sorted(self.estimators))
            raise ConfigError(f"unknown estimator '{name}' (known: {known})") from None

    def list_estimators(self) -> List[str]:
        return list(self.estimators.keys())

    def resolve(self, names: Sequence[str]) -> Dict[str, Estimator]:
        if len(set(names)) != len(names):
            raise ConfigError("estimator names must be unique")
        return {name: self.get(name) for name in names}


registry = EstimatorRegistry()


@registry.register("vanilla")
def vanilla(ctx: EstimationContext) -> Estimate:
    fit = fit_single(ctx.target, ctx.regularizer, ctx.lambda_vanilla, ctx.settings.solver)
    return Estimate(fit.parameter, converged=fit.converged, details={"lambda": ctx.lambda_vanilla})


@registry.register("pooled_cv")
def pooled_cv(ctx: EstimationContext) -> Estimate:
    est = ctx.pooled(ctx.oracle_pool, LambdaPolicy.CV)
    est.flags = list(ctx.study.true_informative)
    return est


@registry.register("pooled_strong")
def pooled_strong(ctx: EstimationContext) -> Estimate:
    est = ctx.pooled(ctx.oracle_pool, LambdaPolicy.STRONGER)
    est.flags = list(ctx.study.true_informative)
    return est


@registry.register("pooled_half")
def pooled_half(ctx: EstimationContext) -> Estimate:
    est = ctx.pooled(ctx.oracle_pool, LambdaPolicy.HALF_VANILLA)
    est.flags = list(ctx.study.true_informative)
    return est


@registry.register("blind_pooled")
def blind_pooled(ctx: EstimationContext) -> Estimate:
    est = ctx.pooled(ctx.everything, LambdaPolicy.HALF_VANILLA)
    est.flags = [True] * len(ctx.study.sources)
    return est


@registry.register("truncated")
def truncated(ctx: EstimationContext) -> Estimate:
    fit = ctx.selection
    return Estimate(
        fit.primal,
        flags=list(fit.informative_flags),
        converged=fit.converged,
        details={
            "dc_iterations": fit.dc_iterations,
            "lambda_q": fit.details.get("lambda_q"),
            "tau": fit.details.get("tau"),
        },
    )


def _finetuned(primal: Estimator) -> Estimator:
    def estimator(ctx: EstimationContext) -> Estimate:
        return ctx.finetuned(primal(ctx))

    estimator.__name__ = f"{primal.__name__}_finetuned"
    return estimator


for _primal in (pooled_cv, pooled_strong, pooled_half, blind_pooled, truncated):
    registry.register(f"{_primal.__name__}_finetuned")(_finetuned(_primal))


@registry.register("population_pooled")
def population_pooled(ctx: EstimationContext) -> Estimate:
    """theta*_P of the informative pool; not an estimate, it needs the true covariances."""
    if ctx.study.covariances is None:
        raise UnsupportedModelError("population_pooled needs a vector study with known designs")
    return Estimate(ctx.study.population_pooled(informative_only=True))


def run_estimators(
    study: GeneratedStudy,
    estimators: Mapping[str, Estimator],
    seed: int,
    settings: Optional[EstimatorSettings] = None,
) -> Dict[str, Estimate]:
    """Evaluate each estimator on one study, sharing a single context."""
    if not estimators:
        raise InvalidInputError("at least one estimator is required")
    ctx = EstimationContext(study, seed, settings or EstimatorSettings())
    return {name: func(ctx) for name, func in estimators.items()}
