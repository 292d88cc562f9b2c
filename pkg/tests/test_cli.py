import json

import numpy as np
import pytest

from tlmest.cli import main as cli
from tlmest.cli.config import RunConfig
from tlmest.common.errors import ConfigError
from tlmest.datagen import ScenarioConfig, load_study
from tlmest.experiments import EstimatorSettings, PresetRegistry, run_replications
from tlmest.solvers import SolverOptions

SCENARIO = {"p": 20, "target_size": 40, "source_sizes": [60, 60], "informative_count": 1}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("TLMEST_SEED", raising=False)
    monkeypatch.delenv("OTEL_EXPORTER_OTLP_ENDPOINT", raising=False)
    monkeypatch.delenv("TLMEST_TRACE_CONSOLE", raising=False)


def write_config(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def study_dir(tmp_path):
    config = write_config(tmp_path, {"scenario": SCENARIO})
    out = tmp_path / "study"
    assert cli.main(["generate", "--config", config, "--seed", "5", "--out", str(out)]) == 0
    return out


def test_generate_writes_study_and_manifest(study_dir):
    study = load_study(study_dir)
    assert study.config.seed == 5
    assert [d.n for d in study.datasets] == [40, 60, 60]
    manifest = json.loads((study_dir / "manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert manifest["seed"] == 5
    assert manifest["config"]["scenario"]["p"] == 20
    assert "version" in manifest


def test_generate_is_reproducible(tmp_path, study_dir):
    config = write_config(tmp_path, {"scenario": SCENARIO})
    again = tmp_path / "again"
    assert cli.main(["generate", "--config", config, "--seed", "5", "--out", str(again)]) == 0
    for name in ("dataset_00.csv", "dataset_01.csv", "study.json"):
        assert (again / name).read_bytes() == (study_dir / name).read_bytes()


def test_seed_falls_back_to_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TLMEST_SEED", "9")
    config = write_config(tmp_path, {"seed": 1, "scenario": SCENARIO})
    out = tmp_path / "study"
    assert cli.main(["generate", "--config", config, "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 9


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    config = write_config(tmp_path, {"sead": 3})
    assert cli.main(["generate", "--config", config]) == cli.EXIT_INVALID
    assert "sead" in capsys.readouterr().err


def test_missing_scenario_section(tmp_path):
    assert cli.main(["generate", "--out", str(tmp_path / "s")]) == cli.EXIT_INVALID


def test_fit_with_fixed_lambda(tmp_path, study_dir):
    out = tmp_path / "fit.json"
    code = cli.main(["fit", "--data", str(study_dir), "--lambda", "0.1", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["parameter"]) == 20
    assert payload["lambda"] == 0.1
    assert payload["regularizer"] == "l1"
    assert "cv_curve" not in payload
    assert (tmp_path / "fit.manifest.json").exists()


def test_fit_cross_validates_without_lambda(tmp_path, study_dir):
    config = write_config(tmp_path, {"tuning": {"values": [0.01, 0.1, 1.0], "folds": 3}})
    out = tmp_path / "fit.json"
    args = ["fit", "--data", str(study_dir), "--config", config, "--out", str(out)]
    assert cli.main(args) == 0
    payload = json.loads(out.read_text())
    assert payload["lambda"] in (0.01, 0.1, 1.0)
    assert len(payload["cv_curve"]) == 3


def test_fit_index_out_of_range(tmp_path, study_dir):
    args = ["fit", "--data", str(study_dir), "--index", "3", "--out", str(tmp_path / "f.json")]
    assert cli.main(args) == cli.EXIT_INVALID


def test_fit_on_raw_dataset_files(tmp_path, study_dir):
    out = tmp_path / "fit.json"
    files = [str(study_dir / "dataset_00.csv"), str(study_dir / "dataset_01.csv")]
    code = cli.main(["fit", "--data", *files, "--index", "1", "--lambda", "0.2", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["index"] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--lambda", "abc", "--data", "x"],
        ["fit", "--regularizer", "l2", "--data", "x"],
        [],
    ],
)
def test_argument_errors_exit_as_invalid_input(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == cli.EXIT_INVALID
    assert "usage: tlmest" in capsys.readouterr().err


def test_missing_data_file_is_an_error(tmp_path):
    args = ["fit", "--data", str(tmp_path / "nope.csv"), "--lambda", "0.1"]
    assert cli.main(args) == cli.EXIT_INVALID


def test_strict_turns_non_convergence_into_exit_two(tmp_path, study_dir):
    config = write_config(
        tmp_path, {"transfer": {"lambda_pool": 0.01, "solver": {"max_iterations": 1}}}
    )
    base = ["fit", "--data", str(study_dir), "--config", config, "--lambda", "0.001"]
    assert cli.main([*base, "--out", str(tmp_path / "a.json")]) == cli.EXIT_OK
    assert json.loads((tmp_path / "a.json").read_text())["converged"] is False
    strict = [*base, "--out", str(tmp_path / "b.json"), "--strict"]
    assert cli.main(strict) == cli.EXIT_NOT_CONVERGED


def test_transfer_without_fine_tuning(tmp_path, study_dir):
    out = tmp_path / "transfer.json"
    args = ["transfer", "--data", str(study_dir), "--lambda-pool", "0.05", "--finetune", "none"]
    assert cli.main([*args, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    np.testing.assert_array_equal(payload["delta"], 0.0)
    assert payload["finetuned"] == payload["primal"]
    manifest = json.loads((tmp_path / "transfer.manifest.json").read_text())
    assert manifest["command"] == "transfer"
    assert "--finetune" in manifest["argv"]


def test_transfer_with_lagrangian_step_and_chosen_sources(tmp_path, study_dir):
    out = tmp_path / "transfer.json"
    args = [
        "transfer",
        "--data",
        str(study_dir),
        "--lambda-pool",
        "0.05",
        "--finetune",
        "lagrangian:0.02",
        "--sources",
        "1",
        "--out",
        str(out),
    ]
    assert cli.main(args) == 0
    payload = json.loads(out.read_text())
    finetuned = np.add(payload["primal"], payload["delta"])
    np.testing.assert_allclose(payload["finetuned"], finetuned)
    assert payload["diagnostics"]["finetune"]["form"] == "lagrangian"


def test_transfer_argument_errors(tmp_path, study_dir):
    base = ["transfer", "--data", str(study_dir), "--out", str(tmp_path / "t.json")]
    assert cli.main(base) == cli.EXIT_INVALID
    assert cli.main([*base, "--lambda-pool", "0.05", "--sources", "3"]) == cli.EXIT_INVALID
    bad_step = [*base, "--lambda-pool", "0.05", "--finetune", "lagrangian"]
    assert cli.main(bad_step) == cli.EXIT_INVALID


def test_parse_finetune():
    assert cli.parse_finetune("none").kind.value == "none"
    assert cli.parse_finetune("constrained:0.5").value == 0.5
    for text in ("cv:1", "ridge", "lagrangian:abc"):
        with pytest.raises(ConfigError):
            cli.parse_finetune(text)


def test_select_writes_flags_and_trace(tmp_path, study_dir):
    out = tmp_path / "select.json"
    config = write_config(tmp_path, {"selection": {"lambda_pool": 0.05, "lambda_q": 0.5, "tau": 1}})
    args = ["select", "--data", str(study_dir), "--config", config, "--tau", "2.0"]
    assert cli.main([*args, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["informative"]) == 2
    assert len(payload["thetas"]) == 3
    assert payload["finetuned"] == payload["primal"]
    trace = payload["objective_trace"]
    assert all(b <= a + 1e-8 * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))
    manifest = json.loads((tmp_path / "select.manifest.json").read_text())
    assert manifest["config"]["selection"]["tau"] == 1.0


def test_experiment_list(capsys):
    assert cli.main(["experiment", "--list"]) == 0
    listed = capsys.readouterr().out
    assert "table2-desk" in listed
    assert "rate" in listed


@pytest.fixture
def tiny_presets(monkeypatch):
    presets = PresetRegistry()
    scenario = ScenarioConfig(name="tiny", **SCENARIO)
    settings = EstimatorSettings(cv_folds=3, cv_grid_size=4)

    def run(seed, jobs):
        return run_replications(scenario.with_overrides(seed=seed), ["vanilla"], 2, jobs, settings)

    presets.register({"name": "tiny", "description": "two reps", "scale": "desk", "run": run})

    capped = EstimatorSettings(cv_folds=3, cv_grid_size=4, solver=SolverOptions(max_iterations=1))
    strong = scenario.with_overrides(sparsity=5)

    def run_capped(seed, jobs):
        return run_replications(
            strong.with_overrides(seed=seed), ["vanilla", "pooled_cv"], 1, jobs, capped
        )

    presets.register(
        {"name": "tiny-capped", "description": "one sweep", "scale": "desk", "run": run_capped}
    )
    monkeypatch.setattr(cli, "preset_registry", presets)
    return presets


def test_experiment_writes_results(tmp_path, tiny_presets):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        args = ["experiment", "--preset", "tiny", "--seed", "4", "--jobs", "1", "--out", str(out)]
        assert cli.main(args) == 0
    assert (first / "results.csv").read_bytes() == (second / "results.csv").read_bytes()
    summary = json.loads((first / "summary.json").read_text())
    assert summary["metadata"]["preset"] == "tiny"
    assert summary["metadata"]["seed"] == 4
    assert summary["aggregates"][0]["count"] == 2
    manifest = json.loads((first / "manifest.json").read_text())
    assert manifest["outputs"] == [str(first / "results.csv"), str(first / "summary.json")]


def test_strict_experiment_fails_on_non_converged_estimators(tmp_path, tiny_presets):
    base = ["experiment", "--preset", "tiny-capped", "--jobs", "1"]
    assert cli.main([*base, "--out", str(tmp_path / "a")]) == cli.EXIT_OK
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["non_converged"]
    strict = [*base, "--out", str(tmp_path / "b"), "--strict"]
    assert cli.main(strict) == cli.EXIT_NOT_CONVERGED
    assert (tmp_path / "b" / "results.csv").exists()


def test_experiment_needs_a_known_preset(tmp_path, tiny_presets):
    assert cli.main(["experiment", "--out", str(tmp_path)]) == cli.EXIT_INVALID
    assert cli.main(["experiment", "--preset", "table9"]) == cli.EXIT_INVALID


def test_report_aggregates_result_files(tmp_path, tiny_presets, capsys):
    out = tmp_path / "run"
    assert cli.main(["experiment", "--preset", "tiny", "--jobs", "1", "--out", str(out)]) == 0
    csv = str(out / "results.csv")

    table = tmp_path / "aggregates.csv"
    assert cli.main(["report", csv, csv, "--out", str(table)]) == 0
    header, line = table.read_text().splitlines()
    assert header.startswith("scenario,estimator,count,err_l1_mean,err_l1_se")
    assert line.startswith("tiny,vanilla,4,")

    assert cli.main(["report", csv]) == 0
    assert "tiny,vanilla,2," in capsys.readouterr().out


def test_report_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    assert cli.main(["report", str(path)]) == cli.EXIT_INVALID


def test_run_config_sections():
    cfg = RunConfig.from_dict(
        {
            "seed": 3,
            "scenario": SCENARIO,
            "transfer": {"lambda_pool": 0.1, "finetune": "cv"},
            "estimators": {"cv_folds": 3},
            "io": {"output": "out"},
        }
    )
    assert cfg.scenario.p == 20
    assert cfg.estimators.cv_folds == 3
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    for bad in ({"jobs": 0}, {"seed": -1}, {"io": {"input": "x"}}, {"scenario": 3}):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)
