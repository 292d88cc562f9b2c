#!/usr/bin/env python3
"""
tlmest command line.

    tlmest generate   --config run.json --out study/
    tlmest fit        --data study/ [--lambda 0.1] --out fit.json
    tlmest transfer   --data study/ --config run.json [--finetune cv] --out transfer.json
    tlmest select     --data study/ --config run.json --out select.json
    tlmest experiment --preset table2-desk --seed 7 --out results/
    tlmest report     results/results.csv [more.csv ...] --out aggregates.csv

Exit codes: 0 success, 1 invalid input or I/O failure, 2 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence

import pandas as pd

from tlmest import __version__
from tlmest.common.config import get_settings
from tlmest.common.errors import ConfigError, InvalidInputError, TlmestError
from tlmest.common.observability import configure_tracing, get_logger, traced
from tlmest.core import Dataset, LossFamily, Parameter, Regularizer
from tlmest.datagen import generate, load_study, read_csv_dataset, read_tlmx, save_study
from tlmest.experiments import aggregate, preset_registry, read_records
from tlmest.selection import SelectionConfig, select_and_transfer
from tlmest.solvers import SolverOptions, fit_single
from tlmest.transfer import FineTune, TransferConfig, oracle_transfer
from tlmest.tuning import TuningGrid, cv_select, default_grid, lambda_max

from .config import RunConfig, plain

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2

logger = get_logger()


class CliParser(argparse.ArgumentParser):
    """Argument errors exit with EXIT_INVALID."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@dataclass
class CommandOutcome:
    converged: bool = True
    outputs: List[str] = field(default_factory=list)
    manifest: Optional[Path] = None


def parse_finetune(text: str) -> FineTune:
    """``none``, ``cv``, ``lagrangian:<zeta>`` or ``constrained:<radius>``."""
    kind, _, value = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("none", "cv") and not value:
            return FineTune(kind)
        if kind in ("lagrangian", "constrained") and value:
            return FineTune(kind, float(value))
    except ValueError as e:
        raise ConfigError(f"--finetune {text!r}: {e}") from e
    raise ConfigError(
        f"--finetune {text!r}: expected none, cv, lagrangian:<zeta> or constrained:<radius>"
    )


def resolve_seed(args: argparse.Namespace, cfg: RunConfig) -> int:
    """--seed, then TLMEST_SEED, then the config file."""
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env_seed = get_settings().seed
    if env_seed is not None:
        return int(env_seed)
    return cfg.seed


def load_datasets(paths: Sequence[str], family: str) -> List[Dataset]:
    """A study directory, or dataset files with the target first."""
    if len(paths) == 1 and Path(paths[0]).is_dir():
        return load_study(paths[0]).datasets
    datasets = []
    for path in paths:
        reader = read_tlmx if Path(path).suffix == ".tlmx" else read_csv_dataset
        datasets.append(reader(path, family=LossFamily.parse(family)))
    return datasets


def _data_paths(args: argparse.Namespace, cfg: RunConfig) -> List[str]:
    paths = list(args.data or [])
    if not paths and cfg.io.data:
        paths = [cfg.io.data]
    if not paths:
        raise ConfigError("no input data: pass --data or set io.data in the config")
    return paths


def _output_path(args: argparse.Namespace, cfg: RunConfig, default: str) -> Path:
    return Path(args.out or cfg.io.output or default)


def _parameter_json(theta: Parameter) -> Any:
    return theta.values.tolist()


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def manifest_beside(output: Path) -> Path:
    return output.with_name(f"{output.stem}.manifest.json")


def write_manifest(
    path: Path,
    command: str,
    argv: Sequence[str],
    cfg: RunConfig,
    seed: int,
    outputs: Sequence[str],
) -> Path:
    """Config echo, resolved seed and version: enough to rerun the command exactly."""
    payload = {
        "command": command,
        "argv": list(argv),
        "config": cfg.to_dict(),
        "seed": seed,
        "version": __version__,
        "outputs": list(outputs),
    }
    return write_json(path, payload)


def cmd_generate(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    if cfg.scenario is None:
        raise ConfigError("generate needs a 'scenario' section in the config")
    study = generate(cfg.scenario.with_overrides(seed=seed))
    out = _output_path(args, cfg, "study")
    path = save_study(study, out)
    logger.info("generated study", extra={"datasets": len(study.datasets), "path": str(out)})
    return CommandOutcome(outputs=[str(path)], manifest=out / "manifest.json")


def _regularizer_for(d: Dataset, requested: Optional[str]) -> Regularizer:
    if requested:
        return Regularizer.parse(requested)
    return Regularizer.nuclear() if d.is_matrix else Regularizer.l1()


def cmd_fit(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    datasets = load_datasets(_data_paths(args, cfg), args.family)
    if not 0 <= args.index < len(datasets):
        raise InvalidInputError(f"--index {args.index} out of range for {len(datasets)} datasets")
    d = datasets[args.index]
    r = _regularizer_for(d, args.regularizer)
    solver = cfg.transfer.solver if cfg.transfer else SolverOptions.from_env()

    curve = None
    if args.lam is not None:
        lam = float(args.lam)
    else:
        grid = cfg.tuning or TuningGrid(default_grid(lambda_max([d], r)))

        def fitter(train: Dataset, value: float) -> Parameter:
            return fit_single(train, r, value, solver).parameter

        choice = cv_select(d, fitter, grid, seed)
        lam, curve = choice.lam, choice.curve.tolist()
    fit = fit_single(d, r, lam, solver)
    if not fit.converged:
        logger.warning("fit did not converge", extra={"iterations": fit.iterations})

    out = _output_path(args, cfg, "fit.json")
    payload = {
        "parameter": _parameter_json(fit.parameter),
        "lambda": lam,
        "regularizer": r.kind.value,
        "index": args.index,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "objective": fit.details.get("objective"),
    }
    if curve is not None:
        payload["cv_curve"] = curve
    write_json(out, payload)
    return CommandOutcome(fit.converged, [str(out)], manifest_beside(out))


def _transfer_config(args: argparse.Namespace, cfg: RunConfig, seed: int) -> TransferConfig:
    base = cfg.transfer
    if base is None:
        if args.lambda_pool is None:
            raise ConfigError("transfer needs a 'transfer' section or --lambda-pool")
        base = TransferConfig(lambda_pool=args.lambda_pool)
    changes: Dict[str, Any] = {"cv_seed": seed}
    if args.lambda_pool is not None:
        changes["lambda_pool"] = args.lambda_pool
    if args.finetune:
        changes["finetune"] = parse_finetune(args.finetune)
    return dataclasses.replace(base, **changes)


def cmd_transfer(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    datasets = load_datasets(_data_paths(args, cfg), args.family)
    tcfg = _transfer_config(args, cfg, seed)
    if args.sources:
        chosen = [int(k) for k in args.sources.split(",") if k.strip()]
        if any(not 1 <= k < len(datasets) for k in chosen):
            raise InvalidInputError(f"--sources must index 1..{len(datasets) - 1}")
        datasets = [datasets[0]] + [datasets[k] for k in chosen]
    fit = oracle_transfer(datasets, 0, tcfg)

    out = _output_path(args, cfg, "transfer.json")
    write_json(
        out,
        {
            "primal": _parameter_json(fit.primal),
            "finetuned": _parameter_json(fit.finetuned),
            "delta": _parameter_json(fit.delta),
            "converged": fit.converged,
            "diagnostics": plain(fit.diagnostics),
        },
    )
    return CommandOutcome(fit.converged, [str(out)], manifest_beside(out))


def _selection_config(args: argparse.Namespace, cfg: RunConfig) -> SelectionConfig:
    values: Dict[str, Any] = plain(cfg.selection) if cfg.selection else {}
    for key in ("lambda_pool", "lambda_q", "tau"):
        override = getattr(args, key)
        if override is not None:
            values[key] = override
    return SelectionConfig.from_dict(values)


def cmd_select(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    datasets = load_datasets(_data_paths(args, cfg), args.family)
    scfg = _selection_config(args, cfg)
    finetune = parse_finetune(args.finetune) if args.finetune else FineTune.none()
    selection, fit = select_and_transfer(datasets, scfg, finetune, cv_seed=seed)

    out = _output_path(args, cfg, "select.json")
    write_json(
        out,
        {
            "thetas": [_parameter_json(t) for t in selection.thetas],
            "primal": _parameter_json(fit.primal),
            "finetuned": _parameter_json(fit.finetuned),
            "informative": list(selection.informative_flags),
            "dc_iterations": selection.dc_iterations,
            "converged": fit.converged,
            "objective_trace": list(selection.objective_trace),
        },
    )
    return CommandOutcome(fit.converged, [str(out)], manifest_beside(out))


def cmd_experiment(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    if args.list:
        for name in preset_registry.list_presets():
            print(f"{name}\t{preset_registry.get_preset(name)['description']}")
        return CommandOutcome()
    if not args.preset:
        raise ConfigError("experiment needs --preset (see --list)")
    jobs = args.jobs or cfg.jobs
    result = preset_registry.run(args.preset, seed=seed, jobs=jobs)

    out = _output_path(args, cfg, f"results-{args.preset}")
    csv_path = result.to_csv(out / "results.csv", timing=args.timing)
    summary_path = result.write_summary(out / "summary.json")
    if result.failures:
        logger.warning("some estimator runs failed", extra={"failures": len(result.failures)})
    outputs = [str(csv_path), str(summary_path)]
    return CommandOutcome(result.converged, outputs, out / "manifest.json")


def cmd_report(args: argparse.Namespace, cfg: RunConfig, seed: int) -> CommandOutcome:
    frames = [read_records(path) for path in args.csv]
    table = aggregate(pd.concat(frames, ignore_index=True))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False, float_format="%.10g", na_rep="", lineterminator="\n")
        return CommandOutcome(outputs=[str(out)], manifest=manifest_beside(out))
    table.to_csv(sys.stdout, index=False, float_format="%.6g", na_rep="")
    return CommandOutcome()


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig, int], CommandOutcome]] = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "transfer": cmd_transfer,
    "select": cmd_select,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides TLMEST_SEED)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument(
        "--strict", action="store_true", help="exit 2 when a solver does not converge"
    )

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", nargs="+", help="study directory, or dataset files target first")
    data.add_argument(
        "--family", default="squared", help="loss family of raw dataset files (squared, logit)"
    )

    parser = CliParser(prog="tlmest", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=f"tlmest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[common], help="write a simulated study")

    fit = sub.add_parser("fit", parents=[common, data], help="penalized fit on one dataset")
    fit.add_argument("--lambda", dest="lam", type=float, help="penalty level; CV when omitted")
    fit.add_argument("--index", type=int, default=0, help="dataset to fit (0 = target)")
    fit.add_argument("--regularizer", choices=["l1", "nuclear"])

    transfer = sub.add_parser("transfer", parents=[common, data], help="pool, then fine-tune")
    transfer.add_argument("--lambda-pool", type=float)
    transfer.add_argument("--finetune", help="none, cv, lagrangian:<zeta>, constrained:<radius>")
    transfer.add_argument("--sources", help="comma-separated source indices to pool")

    selection = sub.add_parser(
        "select", parents=[common, data], help="truncated-penalty source selection"
    )
    selection.add_argument("--lambda-pool", type=float)
    selection.add_argument("--lambda-q", type=float)
    selection.add_argument("--tau", type=float)
    selection.add_argument("--finetune", help="none, cv, lagrangian:<zeta>, constrained:<radius>")

    experiment = sub.add_parser("experiment", parents=[common], help="run a named preset")
    experiment.add_argument("--preset", help="preset name, e.g. table2-desk")
    experiment.add_argument("--jobs", type=int, help="worker processes")
    experiment.add_argument(
        "--timing", action="store_true", help="fill the seconds column with wall times"
    )
    experiment.add_argument("--list", action="store_true", help="list presets and exit")

    report = sub.add_parser("report", parents=[common], help="aggregate result CSVs")
    report.add_argument("csv", nargs="+", help="result CSV files")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    configure_tracing()
    logger.append_keys(command=args.command)

    try:
        cfg = RunConfig.load(args.config)
        seed = resolve_seed(args, cfg)
        if seed < 0:
            raise ConfigError(f"seed must be >= 0, got {seed}")
        with traced(f"cli.{args.command}", seed=seed) as info:
            outcome = COMMANDS[args.command](args, cfg, seed)
            info["converged"] = outcome.converged
    except TlmestError as e:
        logger.error(str(e), extra={"error": type(e).__name__})
        print(f"tlmest: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"tlmest: I/O error: {e}", file=sys.stderr)
        return EXIT_INVALID

    if outcome.manifest is not None:
        write_manifest(outcome.manifest, args.command, argv, cfg, seed, outcome.outputs)
    if not outcome.converged:
        if args.strict:
            logger.error("non-convergence under --strict")
            return EXIT_NOT_CONVERGED
        logger.warning("finished with non-converged solver results")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
