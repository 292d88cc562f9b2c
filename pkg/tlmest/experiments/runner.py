"""Monte Carlo replication engine."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tlmest.common.config import get_settings
from tlmest.common.errors import InvalidInputError
from tlmest.common.observability import traced
from tlmest.datagen import ScenarioConfig, generate, replication_seed

from .estimators import EstimationContext, EstimatorSettings, registry
from .metrics import error_metrics, tpr_tnr
from .records import ExperimentResult, records_frame

logger = logging.getLogger(__name__)

Rows = List[Dict[str, Any]]
Failures = List[Dict[str, Any]]
Runs = List[Dict[str, Any]]


@dataclass(frozen=True)
class ReplicationTask:
    scenario: ScenarioConfig
    estimators: Tuple[str, ...]
    settings: EstimatorSettings
    rep: int


def _run_key(task: ReplicationTask, seed: int, estimator: str) -> Dict[str, Any]:
    return {"scenario": task.scenario.name, "rep": task.rep, "seed": seed, "estimator": estimator}


def _failure(task: ReplicationTask, seed: int, estimator: str, error: BaseException) -> Dict:
    return {**_run_key(task, seed, estimator), "error": f"{type(error).__name__}: {error}"}


def run_replication(task: ReplicationTask) -> Tuple[Rows, Failures, Runs]:
    """
    Generate one study and evaluate every estimator on it.

    The study seed is ``replication_seed(scenario.seed, rep)``, so the outcome depends only
    on the task, not on which worker runs it or when. Estimators that returned without
    converging are listed in the third element.
    """
    seed = replication_seed(task.scenario.seed, task.rep)
    rows: Rows = []
    failures: Failures = []
    non_converged: Runs = []
    with traced(
        "experiments.replication", scenario=task.scenario.name, rep=task.rep, seed=seed
    ) as info:
        try:
            study = generate(task.scenario.with_overrides(seed=seed))
        except Exception as e:
            logger.error(
                "scenario %s rep %d: generation failed: %s", task.scenario.name, task.rep, e
            )
            failures.append(_failure(task, seed, "*", e))
            return rows, failures, non_converged

        ctx = EstimationContext(study, seed, task.settings)
        for name in task.estimators:
            start = time.perf_counter()
            try:
                estimate = registry.get(name)(ctx)
                errors = error_metrics(estimate.theta, ctx.truth)
                if estimate.flags is not None:
                    tpr, tnr = tpr_tnr(estimate.flags, study.true_informative)
                else:
                    tpr = tnr = None
            except Exception as e:
                logger.error(
                    "scenario %s rep %d: estimator %s failed: %s",
                    task.scenario.name,
                    task.rep,
                    name,
                    e,
                )
                failures.append(_failure(task, seed, name, e))
                continue
            if not estimate.converged:
                logger.warning(
                    "scenario %s rep %d: estimator %s did not converge",
                    task.scenario.name,
                    task.rep,
                    name,
                )
                non_converged.append(_run_key(task, seed, name))
            rows.append(
                {
                    "scenario": task.scenario.name,
                    "seed": seed,
                    "estimator": name,
                    "err_l1": errors.l1,
                    "err_l2": errors.l2,
                    "err_nuc": errors.nuc,
                    "err_fro": errors.fro,
                    "tpr": tpr,
                    "tnr": tnr,
                    "seconds": time.perf_counter() - start,
                }
            )
        info.update(rows=len(rows), failures=len(failures), non_converged=len(non_converged))
    return rows, failures, non_converged


def run_replications(
    cfg: ScenarioConfig,
    estimators: Sequence[str],
    reps: int,
    parallelism: Optional[int] = None,
    settings: Optional[EstimatorSettings] = None,
) -> ExperimentResult:
    """
    Run ``reps`` independent replications of one scenario.

    Args:
        cfg: scenario template; its seed is the master seed of the run
        estimators: registered estimator names, evaluated in this order
        reps: number of replications, >= 1
        parallelism: worker processes; defaults to TLMEST_JOBS
        settings: tuning settings shared by every replication

    Returns:
        ExperimentResult with records ordered by replication, then estimator; the records
        are identical for any parallelism
    """
    if int(reps) != reps or reps < 1:
        raise InvalidInputError(f"reps must be an integer >= 1, got {reps}")
    names = tuple(estimators)
    registry.resolve(names)
    jobs = parallelism if parallelism is not None else get_settings().jobs
    if jobs < 1:
        raise InvalidInputError(f"parallelism must be >= 1, got {jobs}")
    settings = settings or EstimatorSettings()
    tasks = [ReplicationTask(cfg, names, settings, rep) for rep in range(int(reps))]

    logger.info(
        "running %d replications of %s with %d estimators on %d workers",
        len(tasks),
        cfg.name,
        len(names),
        jobs,
    )
    if jobs == 1 or len(tasks) == 1:
        outcomes = [run_replication(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            outcomes = list(pool.map(run_replication, tasks))

    rows = [row for rep_rows, _, _ in outcomes for row in rep_rows]
    failures = [f for _, rep_failures, _ in outcomes for f in rep_failures]
    non_converged = [r for _, _, rep_runs in outcomes for r in rep_runs]
    if failures:
        logger.warning("%s: %d estimator runs failed", cfg.name, len(failures))
    if non_converged:
        logger.warning("%s: %d estimator runs did not converge", cfg.name, len(non_converged))
    logger.info("%s: %d records collected", cfg.name, len(rows))
    return ExperimentResult(
        records=records_frame(rows),
        failures=failures,
        non_converged=non_converged,
        metadata={
            "scenarios": {cfg.name: cfg.to_dict()},
            "reps": int(reps),
            "estimators": list(names),
            "settings": settings.to_dict(),
        },
    )
