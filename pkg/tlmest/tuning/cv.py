"""K-fold cross-validation and hold-out scoring on the target study."""

from __future__ import annotations

import logging
from typing import Callable, List, NamedTuple, Optional

import numpy as np
from sklearn.model_selection import KFold, train_test_split

from tlmest.common.errors import InvalidInputError, TlmestError, TuningError
from tlmest.common.observability import traced
from tlmest.core import Dataset, Parameter

from .grid import Criterion, TuningGrid

logger = logging.getLogger(__name__)

Fitter = Callable[[Dataset, float], Parameter]


class CVSelection(NamedTuple):
    lam: float
    curve: np.ndarray


def _sklearn_seed(seed: int) -> int:
    return int(seed) % (2**32)


def fold_partition(n: int, folds: int, seed: int) -> List[np.ndarray]:
    """Held-out index sets of a seeded shuffled K-fold split of range(n)."""
    if folds > n:
        raise InvalidInputError(f"{folds} folds need at least {folds} observations, got {n}")
    splitter = KFold(n_splits=folds, shuffle=True, random_state=_sklearn_seed(seed))
    return [test for _, test in splitter.split(np.arange(n))]


def pick_largest_minimizer(values: np.ndarray, scores: np.ndarray) -> int:
    """Index of the largest value among those attaining the minimal score."""
    best = float(np.min(scores))
    ties = np.flatnonzero(scores <= best + 1e-12 * max(1.0, abs(best)))
    return int(ties[np.argmax(values[ties])])


def cv_select(d: Dataset, fitter: Fitter, grid: TuningGrid, seed: int = 0) -> CVSelection:
    """
    Pick the penalty level minimizing the mean held-out criterion.

    Args:
        d: the study to cross-validate on
        fitter: maps (training fold, lambda) to a fitted Parameter
        grid: candidate penalty levels, fold count and criterion
        seed: fold shuffling seed

    Returns:
        (lambda*, mean criterion per grid value); ties go to the larger lambda
    """
    criterion: Criterion = grid.criterion_for(d.family)
    values = np.asarray(grid.values)
    held_out = fold_partition(d.n, grid.folds, seed)
    everything = np.arange(d.n)
    scores = np.zeros((len(held_out), values.size))

    with traced("tuning.cv_select", n=d.n, folds=grid.folds, grid=values.size) as info:
        for f, test in enumerate(held_out):
            train = d.subset(np.setdiff1d(everything, test))
            test_set = d.subset(test)
            for j, lam in enumerate(values):
                try:
                    theta = fitter(train, float(lam))
                except TlmestError as e:
                    raise TuningError(f"fit failed on fold {f} at lambda={lam:.6g}: {e}") from e
                scores[f, j] = criterion.score(test_set, theta)
        curve = scores.mean(axis=0)
        chosen = pick_largest_minimizer(values, curve)
        info["lambda"] = float(values[chosen])

    logger.debug(
        "cv_select picked lambda=%.6g (index %d of %d)", values[chosen], chosen, values.size
    )
    return CVSelection(float(values[chosen]), curve)


def target_holdout_score(
    target: Dataset,
    fit_fn: Callable[[Dataset], Parameter],
    seed: int = 0,
    holdout_fraction: float = 0.2,
    criterion: Optional[Criterion] = None,
) -> float:
    """Fit on a seeded training share of the target and score the held-out rest."""
    if not 0.0 < holdout_fraction < 1.0:
        raise InvalidInputError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}")
    train_idx, test_idx = train_test_split(
        np.arange(target.n), test_size=holdout_fraction, random_state=_sklearn_seed(seed)
    )
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise InvalidInputError(f"target with n={target.n} is too small to hold out")
    theta = fit_fn(target.subset(np.sort(train_idx)))
    criterion = criterion or Criterion.default_for(target.family)
    return criterion.score(target.subset(np.sort(test_idx)), theta)
