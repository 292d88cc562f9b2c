"""Truncated-penalty source selection: sparse linear and low-rank trace studies."""

from functools import partial

from tlmest.datagen import ScenarioConfig

from ..utils import DESK_SETTINGS, run_scenarios

ESTIMATORS = (
    "blind_pooled",
    "pooled_half",
    "truncated",
    "blind_pooled_finetuned",
    "pooled_half_finetuned",
    "truncated_finetuned",
)
TRACE_ESTIMATORS = ("vanilla",) + ESTIMATORS


def sparse_scenarios(p: int, target_size: int, source_size: int):
    return [
        ScenarioConfig(
            name=f"{design}+{coeffs}",
            design=design,
            coeff_family=coeffs,
            p=p,
            target_size=target_size,
            source_sizes=(source_size,) * 10,
            informative_count=5,
        )
        for coeffs in ("l0", "l1")
        for design in ("homo", "hetero")
    ]


def trace_scenarios(dim: int, n: int, rank: int):
    return [
        ScenarioConfig(
            name=link,
            design="hetero",
            coeff_family="low_rank",
            d1=dim,
            d2=dim,
            rank=rank,
            target_size=n,
            source_sizes=(n,) * 4,
            informative_count=2,
            family="squared" if link == "linear" else "logit",
        )
        for link in ("linear", "logit")
    ]


def run_table2(seed: int = 0, jobs=None, desk: bool = False):
    if desk:
        return run_scenarios(
            sparse_scenarios(100, 100, 150), ESTIMATORS, 10, seed, jobs, DESK_SETTINGS
        )
    return run_scenarios(sparse_scenarios(500, 250, 500), ESTIMATORS, 100, seed, jobs)


def run_table3(seed: int = 0, jobs=None, desk: bool = False):
    if desk:
        return run_scenarios(
            trace_scenarios(10, 200, 2), TRACE_ESTIMATORS, 20, seed, jobs, DESK_SETTINGS
        )
    return run_scenarios(trace_scenarios(20, 400, 3), TRACE_ESTIMATORS, 100, seed, jobs)


PRESET_DEFINITIONS = [
    {
        "name": "table2",
        "description": "sparse linear selection, 5 informative of 10 sources, p=500",
        "scale": "full",
        "run": run_table2,
    },
    {
        "name": "table2-desk",
        "description": "sparse linear selection, 5 informative of 10 sources, p=100",
        "scale": "desk",
        "run": partial(run_table2, desk=True),
    },
    {
        "name": "table3",
        "description": "low-rank trace selection, linear and logit links, 20 x 20, rank 3",
        "scale": "full",
        "run": run_table3,
    },
    {
        "name": "table3-desk",
        "description": "low-rank trace selection, linear and logit links, 10 x 10, rank 2",
        "scale": "desk",
        "run": partial(run_table3, desk=True),
    },
]
