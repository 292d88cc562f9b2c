"""Per-replication records, their aggregates and the CSV / JSON result files."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from tlmest import __version__
from tlmest.common.errors import InvalidInputError, StorageError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "scenario",
    "seed",
    "estimator",
    "err_l1",
    "err_l2",
    "err_nuc",
    "err_fro",
    "tpr",
    "tnr",
    "seconds",
]
METRIC_COLUMNS = ["err_l1", "err_l2", "err_nuc", "err_fro", "tpr", "tnr"]
SCHEMA_VERSION = 1

PathLike = Union[str, Path]


def empty_records() -> pd.DataFrame:
    frame = pd.DataFrame({column: pd.Series(dtype="float64") for column in RESULT_COLUMNS})
    frame["scenario"] = frame["scenario"].astype(object)
    frame["estimator"] = frame["estimator"].astype(object)
    frame["seed"] = frame["seed"].astype("int64")
    return frame


def records_frame(rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    if not rows:
        return empty_records()
    frame = pd.DataFrame(list(rows))
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidInputError(f"result rows lack columns {missing}")
    frame = frame[RESULT_COLUMNS]
    frame["seed"] = frame["seed"].astype("int64")
    for column in METRIC_COLUMNS + ["seconds"]:
        frame[column] = pd.to_numeric(frame[column], errors="coerce").astype("float64")
    return frame


def primary_error(frame: pd.DataFrame) -> pd.Series:
    """Euclidean error for vector rows, Frobenius error for matrix rows."""
    return frame["err_l2"].fillna(frame["err_fro"])


def aggregate(records: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and standard error of every metric per (scenario, estimator).

    ``count`` is the number of replications behind each row; the standard error is the
    sample standard deviation over sqrt(count), NaN for a single replication. Row order
    follows first appearance in ``records``.
    """
    if records.empty:
        return pd.DataFrame(columns=["scenario", "estimator", "count"])
    grouped = records.groupby(["scenario", "estimator"], sort=False)
    out = grouped.size().rename("count").to_frame()
    for column in METRIC_COLUMNS:
        stats = grouped[column]
        out[f"{column}_mean"] = stats.mean()
        out[f"{column}_se"] = stats.std(ddof=1) / np.sqrt(stats.count())
    return out.reset_index()


def _json_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return _json_value(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return None if math.isnan(value) or math.isinf(value) else float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def frame_to_json(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return _json_value(frame.to_dict(orient="records"))


@dataclass
class ExperimentResult:
    """
    Records of a Monte Carlo run: one row per (replication, estimator).

    Failed (replication, estimator) pairs are kept in ``failures`` rather than in
    ``records``. Pairs whose estimator returned without converging keep their row and are
    also listed in ``non_converged``. ``tables`` holds derived tables (frequencies, log
    errors, slopes).
    """

    records: pd.DataFrame = field(default_factory=empty_records)
    failures: List[Dict[str, Any]] = field(default_factory=list)
    non_converged: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return not self.non_converged

    def aggregates(self) -> pd.DataFrame:
        return aggregate(self.records)

    @classmethod
    def combine(
        cls, parts: Sequence["ExperimentResult"], metadata: Optional[Dict[str, Any]] = None
    ) -> "ExperimentResult":
        frames = [p.records for p in parts if not p.records.empty]
        records = pd.concat(frames, ignore_index=True) if frames else empty_records()
        return cls(
            records=records,
            failures=[f for p in parts for f in p.failures],
            non_converged=[r for p in parts for r in p.non_converged],
            metadata=dict(metadata or {}),
        )

    def to_csv(self, path: PathLike, timing: bool = False) -> Path:
        """Write the records; ``seconds`` stays blank unless ``timing`` is set."""
        out = self.records.copy()
        if not timing:
            out["seconds"] = np.nan
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        out.to_csv(path, index=False, float_format="%.10g", na_rep="", lineterminator="\n")
        return path

    def summary(self) -> Dict[str, Any]:
        return _json_value(
            {
                "schema_version": SCHEMA_VERSION,
                "version": __version__,
                "columns": RESULT_COLUMNS,
                "metadata": self.metadata,
                "aggregates": frame_to_json(self.aggregates()),
                "failures": self.failures,
                "non_converged": self.non_converged,
                "tables": self.tables,
            }
        )

    def write_summary(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return path


def read_records(path: PathLike) -> pd.DataFrame:
    """Load a result CSV, checking its column schema."""
    try:
        frame = pd.read_csv(path, keep_default_na=True)
    except (OSError, ValueError) as e:
        raise StorageError(f"{path}: cannot read result CSV: {e}") from e
    if list(frame.columns) != RESULT_COLUMNS:
        raise StorageError(f"{path}: expected columns {','.join(RESULT_COLUMNS)}")
    return records_frame(frame.to_dict(orient="records"))
