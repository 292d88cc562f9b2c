"""Best estimator as the contrast level h moves from 0.1 to 10."""

from functools import partial

from tlmest.datagen import ScenarioConfig

from ...sweep import default_h_grid, h_sweep
from ..utils import DESK_SETTINGS

ESTIMATORS = (
    "pooled_strong",
    "pooled_strong_finetuned",
    "truncated",
    "truncated_finetuned",
    "vanilla",
)


def template(seed: int, desk: bool) -> ScenarioConfig:
    p, n, sources = (200, 150, 6) if desk else (400, 300, 10)
    return ScenarioConfig(
        name="h-sweep",
        design="hetero",
        coeff_family="h_sweep",
        p=p,
        target_size=n,
        source_sizes=(n,) * sources,
        seed=seed,
    )


def run_sweep(seed: int = 0, jobs=None, desk: bool = False):
    settings = DESK_SETTINGS if desk else None
    reps = 20 if desk else 100
    sweep = h_sweep(template(seed, desk), default_h_grid(), ESTIMATORS, reps, jobs, settings)
    return sweep.result


PRESET_DEFINITIONS = [
    {
        "name": name,
        "description": f"{what} over 8 log-spaced h in [0.1, 10]",
        "scale": "desk" if name.endswith("-desk") else "full",
        "run": partial(run_sweep, desk=name.endswith("-desk")),
    }
    for name, what in (
        ("table4", "mean log squared error"),
        ("table4-desk", "mean log squared error"),
        ("fig3", "best-estimator frequencies"),
        ("fig3-desk", "best-estimator frequencies"),
    )
]
