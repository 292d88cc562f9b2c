"""Oracle pooling under homogeneous and heterogeneous designs, all sources informative."""

from functools import partial

from tlmest.datagen import ScenarioConfig

from ..utils import DESK_SETTINGS, run_scenarios

ESTIMATORS = (
    "vanilla",
    "pooled_cv",
    "pooled_strong",
    "pooled_cv_finetuned",
    "pooled_strong_finetuned",
    "population_pooled",
)


def scenarios(p: int, target_size: int, source_size: int):
    return [
        ScenarioConfig(
            name=f"{design}+{coeffs}",
            design=design,
            coeff_family=coeffs,
            p=p,
            target_size=target_size,
            source_sizes=(source_size,) * 5,
        )
        for coeffs in ("l0", "l1")
        for design in ("homo", "hetero")
    ]


def run_table1(seed: int = 0, jobs=None, desk: bool = False):
    if desk:
        return run_scenarios(scenarios(100, 60, 120), ESTIMATORS, 10, seed, jobs, DESK_SETTINGS)
    return run_scenarios(scenarios(500, 250, 500), ESTIMATORS, 100, seed, jobs)


PRESET_DEFINITIONS = [
    {
        "name": "table1",
        "description": "oracle pooling with cross-validated and stronger lambda_P, p=500",
        "scale": "full",
        "run": run_table1,
    },
    {
        "name": "table1-desk",
        "description": "oracle pooling with cross-validated and stronger lambda_P, p=100",
        "scale": "desk",
        "run": partial(run_table1, desk=True),
    },
]
