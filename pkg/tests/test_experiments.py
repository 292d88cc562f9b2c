import dataclasses
import json

import numpy as np
import pandas as pd
import pytest

from tlmest.common.errors import ConfigError, InvalidInputError, StorageError
from tlmest.datagen import ScenarioConfig, generate
from tlmest.experiments import (
    RESULT_COLUMNS,
    EstimatorSettings,
    ExperimentResult,
    PresetRegistry,
    aggregate,
    best_estimator_frequencies,
    error_metrics,
    estimator_registry,
    h_sweep,
    rate_slope,
    rate_study,
    read_records,
    records_frame,
    run_estimators,
    run_replications,
    tpr_tnr,
)
from tlmest.solvers import SolverOptions

TINY = ScenarioConfig(
    name="tiny", p=20, target_size=40, source_sizes=(60, 60), informative_count=1, seed=3
)
FAST = EstimatorSettings(
    cv_folds=3,
    cv_grid_size=4,
    lambda_q_factors=(1.0,),
    tau_factors=(1.0,),
    max_dc_iterations=5,
)


def row(scenario="s", seed=0, estimator="vanilla", l2=1.0, tpr=None, seconds=0.5):
    return {
        "scenario": scenario,
        "seed": seed,
        "estimator": estimator,
        "err_l1": 2 * l2,
        "err_l2": l2,
        "err_nuc": None,
        "err_fro": None,
        "tpr": tpr,
        "tnr": None,
        "seconds": seconds,
    }


def test_error_metrics_examples():
    vec = error_metrics(np.array([3.0, 4.0, 0.0]), np.zeros(3))
    assert (vec.l1, vec.l2) == (7.0, 5.0)
    assert np.isnan(vec.nuc) and np.isnan(vec.fro)
    assert vec.primary() == 5.0

    mat = error_metrics(np.diag([3.0, 4.0]), np.zeros((2, 2)))
    assert mat.nuc == pytest.approx(7.0)
    assert mat.fro == pytest.approx(5.0)
    assert np.isnan(mat.l2)
    assert mat.primary() == pytest.approx(5.0)


def test_error_metrics_shape_mismatch():
    from tlmest.common.errors import ShapeMismatchError

    with pytest.raises(ShapeMismatchError):
        error_metrics(np.zeros(3), np.zeros(4))


def test_selection_rates():
    tpr, tnr = tpr_tnr([True, True, False, False, False], [True, True, True, False, False])
    assert tpr == pytest.approx(2 / 3)
    assert tnr == 1.0
    assert tpr_tnr([True, False], [True, True]) == (0.5, None)
    assert tpr_tnr([False], [False]) == (None, 1.0)
    with pytest.raises(InvalidInputError):
        tpr_tnr([True], [True, False])


def test_rate_slope():
    sizes = [100, 200, 400, 800]
    assert rate_slope(sizes, [1.0 / n for n in sizes]) == pytest.approx(-1.0)
    assert rate_slope(sizes, [n**-0.5 for n in sizes]) == pytest.approx(-0.5)
    with pytest.raises(InvalidInputError):
        rate_slope([100, 200], [0.1, 0.05])
    with pytest.raises(InvalidInputError):
        rate_slope([100, 200, 400], [0.1, 0.0, 0.02])


def test_records_frame_schema():
    frame = records_frame([row(), row(seed=1)])
    assert list(frame.columns) == RESULT_COLUMNS
    assert frame["seed"].dtype == np.int64
    assert frame["err_nuc"].isna().all()
    assert records_frame([]).empty
    with pytest.raises(InvalidInputError):
        records_frame([{"scenario": "s"}])


def test_aggregate_mean_and_standard_error():
    rows = [
        row(estimator="a", seed=0, l2=1.0),
        row(estimator="b", seed=0, l2=5.0),
        row(estimator="a", seed=1, l2=3.0),
    ]
    table = aggregate(records_frame(rows))
    assert list(table["estimator"]) == ["a", "b"]
    a = table.iloc[0]
    assert a["count"] == 2
    assert a["err_l2_mean"] == pytest.approx(2.0)
    assert a["err_l2_se"] == pytest.approx(np.std([1.0, 3.0], ddof=1) / np.sqrt(2))
    assert np.isnan(table.iloc[1]["err_l2_se"])


def test_csv_blanks_seconds_unless_timing(tmp_path):
    result = ExperimentResult(records=records_frame([row(), row(seed=1, tpr=0.5)]))
    path = result.to_csv(tmp_path / "out" / "results.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert all(line.endswith(",") for line in lines[1:])
    assert read_records(path)["seconds"].isna().all()

    timed = result.to_csv(tmp_path / "timed.csv", timing=True)
    assert read_records(timed)["seconds"].tolist() == [0.5, 0.5]


def test_read_records_checks_columns(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"scenario": ["s"], "err": [1.0]}).to_csv(path, index=False)
    with pytest.raises(StorageError):
        read_records(path)
    with pytest.raises(StorageError):
        read_records(tmp_path / "missing.csv")


def test_summary_is_json_ready(tmp_path):
    result = ExperimentResult(
        records=records_frame([row(), row(seed=1)]),
        failures=[{"estimator": "truncated", "error": "NumericError: boom"}],
        metadata={"reps": 2},
        tables={"slope": np.float64(-1.0)},
    )
    summary = json.loads(result.write_summary(tmp_path / "summary.json").read_text())
    assert set(summary) == {
        "schema_version",
        "version",
        "columns",
        "metadata",
        "aggregates",
        "failures",
        "non_converged",
        "tables",
    }
    assert summary["columns"] == RESULT_COLUMNS
    assert summary["aggregates"][0]["count"] == 2
    # vector rows have no nuclear error; NaN is written as null
    assert summary["aggregates"][0]["err_nuc_mean"] is None
    assert summary["tables"]["slope"] == -1.0


def test_estimator_registry_lookup():
    names = estimator_registry.list_estimators()
    for name in ("vanilla", "pooled_cv", "truncated", "truncated_finetuned", "blind_pooled"):
        assert name in names
    with pytest.raises(ConfigError):
        estimator_registry.get("ridge")
    with pytest.raises(ConfigError):
        estimator_registry.resolve(["vanilla", "vanilla"])


def test_estimators_on_a_tiny_study():
    study = generate(TINY)
    names = ["vanilla", "pooled_cv", "blind_pooled", "truncated", "population_pooled"]
    estimates = run_estimators(study, estimator_registry.resolve(names), 7, FAST)
    assert list(estimates) == names
    for est in estimates.values():
        assert est.theta.shape == (20,)
        assert np.all(np.isfinite(est.theta.values))
    assert estimates["pooled_cv"].flags == [True, False]
    assert estimates["blind_pooled"].flags == [True, True]
    assert len(estimates["truncated"].flags) == 2
    assert estimates["truncated"].details["tau"] > 0
    np.testing.assert_allclose(
        estimates["population_pooled"].theta.values, study.population_pooled().values
    )


def test_run_estimators_needs_an_estimator():
    with pytest.raises(InvalidInputError):
        run_estimators(generate(TINY), {}, 0, FAST)


def test_replications_are_reproducible():
    names = ["vanilla", "pooled_cv"]
    first = run_replications(TINY, names, 3, parallelism=1, settings=FAST)
    again = run_replications(TINY, names, 3, parallelism=1, settings=FAST)
    columns = [c for c in RESULT_COLUMNS if c != "seconds"]
    pd.testing.assert_frame_equal(first.records[columns], again.records[columns])
    assert len(first.records) == 6
    assert first.records["seed"].nunique() == 3
    assert list(first.records["estimator"][:2]) == names
    assert first.failures == []


def test_replications_do_not_depend_on_parallelism():
    columns = [c for c in RESULT_COLUMNS if c != "seconds"]
    serial = run_replications(TINY, ["vanilla"], 3, parallelism=1, settings=FAST)
    parallel = run_replications(TINY, ["vanilla"], 3, parallelism=2, settings=FAST)
    pd.testing.assert_frame_equal(serial.records[columns], parallel.records[columns])


def test_failed_estimators_are_recorded_not_raised():
    trace = ScenarioConfig(
        name="trace",
        coeff_family="low_rank",
        d1=4,
        d2=4,
        rank=1,
        target_size=40,
        source_sizes=(40,),
    )
    result = run_replications(trace, ["vanilla", "population_pooled"], 1, 1, FAST)
    assert list(result.records["estimator"]) == ["vanilla"]
    assert result.records["err_l2"].isna().all()
    assert result.records["err_fro"].notna().all()
    assert [f["estimator"] for f in result.failures] == ["population_pooled"]
    assert "UnsupportedModelError" in result.failures[0]["error"]


def test_capped_solvers_are_reported_as_non_converged():
    capped = dataclasses.replace(FAST, solver=SolverOptions(max_iterations=1))
    strong = TINY.with_overrides(sparsity=5)
    result = run_replications(strong, ["vanilla", "pooled_cv"], 2, 1, capped)
    assert len(result.records) == 4
    assert result.failures == []
    assert not result.converged
    assert {r["estimator"] for r in result.non_converged} <= {"vanilla", "pooled_cv"}
    assert set(result.non_converged[0]) == {"scenario", "rep", "seed", "estimator"}

    merged = ExperimentResult.combine([result, ExperimentResult()])
    assert merged.non_converged == result.non_converged


def test_replication_arguments_are_checked():
    with pytest.raises(InvalidInputError):
        run_replications(TINY, ["vanilla"], 0)
    with pytest.raises(ConfigError):
        run_replications(TINY, ["lasso"], 1)


def test_best_estimator_frequencies():
    rows = [
        row(estimator="a", seed=0, l2=1.0),
        row(estimator="b", seed=0, l2=2.0),
        row(estimator="a", seed=1, l2=3.0),
        row(estimator="b", seed=1, l2=2.0),
        row(estimator="a", seed=2, l2=1.0),
        row(estimator="b", seed=2, l2=1.0),
    ]
    freq = best_estimator_frequencies(records_frame(rows), ["a", "b"])
    assert freq.to_dict() == pytest.approx({"a": 2 / 3, "b": 1 / 3})


def test_h_sweep_tables():
    template = TINY.with_overrides(name="sweep")
    sweep = h_sweep(template, [0.0, 1.0], ["vanilla", "pooled_cv"], 2, 1, FAST)
    assert list(sweep.frequencies.index) == [0.0, 1.0]
    np.testing.assert_allclose(sweep.frequencies.sum(axis=1), 1.0)
    assert len(sweep.log_errors) == 4
    assert set(sweep.result.records["scenario"]) == {"sweep-h0", "sweep-h1"}
    assert sweep.result.metadata["h_grid"] == [0.0, 1.0]
    assert "frequencies" in sweep.result.tables

    alone = h_sweep(template, [0.5], ["vanilla"], 2, 1, FAST)
    assert alone.frequencies.loc[0.5, "vanilla"] == 1.0
    assert alone.most_frequent() == {0.5: "vanilla"}


def test_h_sweep_rejects_bad_grids():
    with pytest.raises(InvalidInputError):
        h_sweep(TINY, [], ["vanilla"], 1)
    with pytest.raises(InvalidInputError):
        h_sweep(TINY, [-1.0], ["vanilla"], 1)


def test_rate_study_splits_the_pool():
    template = TINY.with_overrides(name="rate")
    rate = rate_study(template, [90, 180, 360], 2, "pooled_cv", 1, FAST)
    assert rate.sizes == [90, 180, 360]
    assert len(rate.mean_squared_errors) == 3
    assert np.isfinite(rate.slope)
    scenarios = rate.result.metadata["scenarios"]
    assert scenarios["rate-n180"]["source_sizes"] == [60, 60]
    assert scenarios["rate-n180"]["contrast_level"] == 0.0
    with pytest.raises(InvalidInputError):
        rate_study(template, [2, 90, 180], 1)


def test_preset_registry_runs_and_stamps():
    presets = PresetRegistry()
    calls = []

    def run(seed, jobs):
        calls.append((seed, jobs))
        return run_replications(TINY.with_overrides(seed=seed), ["vanilla"], 1, 1, FAST)

    presets.register({"name": "tiny", "description": "one rep", "scale": "desk", "run": run})
    assert presets.list_presets() == ["tiny"]
    result = presets.run("tiny", seed=4, jobs=1)
    assert calls == [(4, 1)]
    assert result.metadata["preset"] == "tiny"
    assert result.metadata["provenance"] == "desk-scale"
    assert result.metadata["seed"] == 4
    assert len(result.records) == 1


def test_preset_registry_validation():
    presets = PresetRegistry()
    with pytest.raises(ConfigError):
        presets.register({"name": "x", "scale": "desk"})
    with pytest.raises(ConfigError):
        presets.register({"name": "x", "scale": "huge", "run": print})
    presets.register({"name": "x", "scale": "full", "run": print})
    with pytest.raises(ConfigError):
        presets.register({"name": "x", "scale": "full", "run": print})
    with pytest.raises(ConfigError):
        presets.get_preset("y")


def test_builtin_presets_are_discovered():
    names = PresetRegistry().list_presets()
    for name in ("table1", "table2", "table3", "table4", "fig3", "rate", "table1-desk"):
        assert name in names


@pytest.mark.slow
def test_pooled_lasso_rate_is_near_one_over_n():
    result = PresetRegistry().run("rate", seed=0, jobs=4)
    assert -1.25 <= result.tables["rate"]["slope"] <= -0.75


@pytest.mark.slow
def test_oracle_pooling_beats_the_target_alone():
    result = PresetRegistry().run("table1-desk", seed=0, jobs=2)
    table = result.aggregates().set_index(["scenario", "estimator"])
    for scenario in ("homo+l0", "homo+l1"):
        pooled = table.loc[(scenario, "pooled_cv"), "err_l2_mean"]
        assert pooled < table.loc[(scenario, "vanilla"), "err_l2_mean"]
