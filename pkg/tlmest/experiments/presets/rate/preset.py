"""Convergence rate of the pooled lasso at h = 0."""

from functools import partial

from tlmest.datagen import ScenarioConfig

from ...sweep import rate_study
from ..utils import DESK_SETTINGS


def run_rate(seed: int = 0, jobs=None, desk: bool = False):
    if desk:
        p, sizes, reps = 100, (200, 400, 800, 1600), 5
    else:
        p, sizes, reps = 500, (500, 1000, 2000, 4000), 20
    # three sources; rate_study splits each n_P evenly over the four datasets
    template = ScenarioConfig(
        name="rate",
        design="homo",
        coeff_family="h_sweep",
        p=p,
        source_sizes=(1, 1, 1),
        seed=seed,
    )
    settings = DESK_SETTINGS if desk else None
    return rate_study(template, sizes, reps, "pooled_cv", jobs, settings).result


PRESET_DEFINITIONS = [
    {
        "name": "rate",
        "description": "log-log slope of pooled lasso error against n_P, p=500",
        "scale": "full",
        "run": run_rate,
    },
    {
        "name": "rate-desk",
        "description": "log-log slope of pooled lasso error against n_P, p=100",
        "scale": "desk",
        "run": partial(run_rate, desk=True),
    },
]
