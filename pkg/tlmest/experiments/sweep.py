"""Sweeps over the contrast level h and over the pooled sample size."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from tlmest.common.errors import InvalidInputError
from tlmest.datagen import CoeffFamily, ScenarioConfig

from .estimators import EstimatorSettings
from .metrics import rate_slope
from .records import ExperimentResult, frame_to_json, primary_error
from .runner import run_replications

logger = logging.getLogger(__name__)


def default_h_grid(num: int = 8, low: float = 0.1, high: float = 10.0) -> np.ndarray:
    """``num`` log-linearly spaced contrast levels from ``low`` to ``high``."""
    return np.geomspace(low, high, num)


@dataclass
class HSweepResult:
    """
    Args:
        frequencies: rows are h, columns estimators; share of replications in which the
            estimator had the smallest Euclidean (or Frobenius) error
        log_errors: mean and standard error of ln(error^2) per (h, estimator)
        result: all per-replication records of the sweep
    """

    frequencies: pd.DataFrame
    log_errors: pd.DataFrame
    result: ExperimentResult

    def most_frequent(self) -> Dict[float, str]:
        return {float(h): str(row.idxmax()) for h, row in self.frequencies.iterrows()}


def best_estimator_frequencies(
    records: pd.DataFrame, estimators: Sequence[str]
) -> pd.Series:
    """Share of replications won by each estimator; ties go to the earlier name."""
    frame = records.assign(error=primary_error(records))
    wide = frame.pivot_table(index="seed", columns="estimator", values="error", aggfunc="first")
    wide = wide.reindex(columns=list(estimators)).dropna()
    counts = pd.Series(0.0, index=list(estimators))
    if wide.empty:
        return counts
    winners = wide.to_numpy().argmin(axis=1)
    for j in winners:
        counts.iloc[j] += 1
    return counts / len(wide)


def log_error_table(records: pd.DataFrame, h: float) -> pd.DataFrame:
    frame = records.assign(log_sq=np.log(primary_error(records) ** 2))
    grouped = frame.groupby("estimator", sort=False)["log_sq"]
    out = pd.DataFrame(
        {
            "mean": grouped.mean(),
            "se": grouped.std(ddof=1) / np.sqrt(grouped.count()),
        }
    ).reset_index()
    out.insert(0, "log10_h", float(np.log10(h)) if h > 0 else float("-inf"))
    out.insert(0, "h", float(h))
    return out


def h_sweep(
    template: ScenarioConfig,
    h_grid: Sequence[float],
    estimators: Sequence[str],
    reps: int,
    parallelism: Optional[int] = None,
    settings: Optional[EstimatorSettings] = None,
) -> HSweepResult:
    """
    Run the estimator bake-off at each contrast level of ``h_grid``.

    Every grid point reuses the template's master seed, so replication r sees the same
    covariates and noise at every h.
    """
    grid = [float(h) for h in h_grid]
    if not grid or min(grid) < 0 or not np.all(np.isfinite(grid)):
        raise InvalidInputError("h_grid must be a nonempty list of finite values >= 0")
    if template.coeff_family is not CoeffFamily.H_SWEEP:
        template = template.with_overrides(coeff_family=CoeffFamily.H_SWEEP.value)

    parts: List[ExperimentResult] = []
    freq_rows = {}
    log_tables = []
    for i, h in enumerate(grid):
        cfg = template.with_overrides(name=f"{template.name}-h{i}", contrast_level=h)
        part = run_replications(cfg, estimators, reps, parallelism, settings)
        parts.append(part)
        freq_rows[h] = best_estimator_frequencies(part.records, estimators)
        log_tables.append(log_error_table(part.records, h))
        logger.info("h=%.4g: most frequent best estimator %s", h, freq_rows[h].idxmax())

    frequencies = pd.DataFrame.from_dict(freq_rows, orient="index")
    frequencies.index.name = "h"
    log_errors = pd.concat(log_tables, ignore_index=True)
    result = ExperimentResult.combine(parts)
    result.metadata = {
        "scenarios": {k: v for p in parts for k, v in p.metadata["scenarios"].items()},
        "reps": int(reps),
        "estimators": list(estimators),
        "h_grid": grid,
        "log_error": "natural log of the squared error",
    }
    result.tables.update(
        frequencies=frame_to_json(frequencies.reset_index()),
        log_errors=frame_to_json(log_errors),
    )
    return HSweepResult(frequencies, log_errors, result)


@dataclass
class RateResult:
    sizes: List[int]
    mean_squared_errors: List[float]
    slope: float
    result: ExperimentResult


def rate_study(
    template: ScenarioConfig,
    pooled_sizes: Sequence[int],
    reps: int,
    estimator: str = "pooled_cv",
    parallelism: Optional[int] = None,
    settings: Optional[EstimatorSettings] = None,
) -> RateResult:
    """
    Mean squared error of one estimator at h = 0 as the pooled sample size grows.

    Each pooled size n_P is split evenly across the target and the template's sources.
    The slope of log error against log n_P should sit near -1.
    """
    sizes = [int(n) for n in pooled_sizes]
    datasets = template.sources + 1
    if any(n < datasets for n in sizes):
        raise InvalidInputError(f"every pooled size must be at least {datasets}")

    parts: List[ExperimentResult] = []
    mse: List[float] = []
    for n_pool in sizes:
        share = n_pool // datasets
        cfg = template.with_overrides(
            name=f"{template.name}-n{n_pool}",
            coeff_family=CoeffFamily.H_SWEEP.value,
            contrast_level=0.0,
            target_size=share,
            source_sizes=[share] * template.sources,
        )
        part = run_replications(cfg, [estimator], reps, parallelism, settings)
        parts.append(part)
        mse.append(float(np.mean(primary_error(part.records) ** 2)))
        logger.info("n_P=%d: mean squared error %.6g", n_pool, mse[-1])

    slope = rate_slope(sizes, mse)
    result = ExperimentResult.combine(parts)
    result.metadata = {
        "scenarios": {k: v for p in parts for k, v in p.metadata["scenarios"].items()},
        "reps": int(reps),
        "estimators": [estimator],
        "pooled_sizes": sizes,
    }
    result.tables["rate"] = {"pooled_sizes": sizes, "mean_squared_errors": mse, "slope": slope}
    return RateResult(sizes, mse, slope, result)
