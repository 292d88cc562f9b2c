"""Helpers shared by the preset definitions."""

from typing import Dict, Optional, Sequence

from tlmest.datagen import ScenarioConfig

from ..estimators import EstimatorSettings
from ..records import ExperimentResult
from ..runner import run_replications

# Reduced tuning for desk-scale presets
DESK_SETTINGS = EstimatorSettings(
    cv_grid_size=10,
    lambda_q_factors=(0.5, 2.0),
    tau_factors=(0.5, 1.0, 2.0),
    max_dc_iterations=20,
)


def run_scenarios(
    scenarios: Sequence[ScenarioConfig],
    estimators: Sequence[str],
    reps: int,
    seed: int,
    jobs: Optional[int] = None,
    settings: Optional[EstimatorSettings] = None,
) -> ExperimentResult:
    """Run every scenario under the same master seed and merge the records."""
    parts = [
        run_replications(cfg.with_overrides(seed=seed), estimators, reps, jobs, settings)
        for cfg in scenarios
    ]
    result = ExperimentResult.combine(parts)
    scenario_dicts: Dict[str, Dict] = {}
    for part in parts:
        scenario_dicts.update(part.metadata["scenarios"])
    result.metadata = {
        "scenarios": scenario_dicts,
        "reps": int(reps),
        "estimators": list(estimators),
        "settings": (settings or EstimatorSettings()).to_dict(),
    }
    return result
