"""
On-disk layout of generated studies.

A study is a directory holding ``study.json`` plus one file per dataset: a CSV with
columns ``y,x1..xp`` for vector covariates, or a ``.tlmx`` container for matrix
covariates. A ``.tlmx`` file is a 16-byte little-endian header

    magic  4 bytes  b"TLMX"
    dtype  uint16   1 = float64
    d1     uint16
    d2     uint16
    spare  uint16   0
    n      uint32

followed by n * d1 * d2 float64 covariates (row-major, observation first) and n float64
responses.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from tlmest import __version__
from tlmest.common.errors import StorageError
from tlmest.core import Dataset, LossFamily, Parameter

from .config import ScenarioConfig
from .scenarios import GeneratedStudy

logger = logging.getLogger(__name__)

MAGIC = b"TLMX"
FLOAT64 = 1
HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("dtype", "<u2"),
        ("d1", "<u2"),
        ("d2", "<u2"),
        ("spare", "<u2"),
        ("n", "<u4"),
    ]
)
STUDY_FILE = "study.json"
STUDY_FORMAT = 1

PathLike = Union[str, Path]


def write_csv_dataset(d: Dataset, path: PathLike) -> None:
    if d.is_matrix:
        raise StorageError(f"{path}: CSV storage holds vector covariates only")
    frame = pd.DataFrame(d.covariates, columns=[f"x{j + 1}" for j in range(d.dim)])
    frame.insert(0, "y", d.responses)
    frame.to_csv(path, index=False, float_format="%.17g")


def read_csv_dataset(
    path: PathLike, weight: float = 1.0, family: LossFamily = LossFamily.SQUARED_IDENTITY
) -> Dataset:
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise StorageError(f"{path}: cannot read CSV dataset: {e}") from e
    expected = ["y"] + [f"x{j + 1}" for j in range(frame.shape[1] - 1)]
    if list(frame.columns) != expected or frame.shape[1] < 2:
        raise StorageError(f"{path}: expected columns y,x1..xp, got {list(frame.columns)}")
    values = frame.to_numpy(dtype=np.float64)
    return Dataset(values[:, 1:], values[:, 0], weight=weight, family=family)


def write_tlmx(d: Dataset, path: PathLike) -> None:
    if not d.is_matrix:
        raise StorageError(f"{path}: .tlmx storage holds matrix covariates only")
    d1, d2 = d.param_shape
    if max(d1, d2) > 0xFFFF or d.n > 0xFFFFFFFF:
        raise StorageError(f"{path}: dimensions exceed the .tlmx header range")
    header = np.array([(MAGIC, FLOAT64, d1, d2, 0, d.n)], dtype=HEADER)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.ascontiguousarray(d.covariates, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(d.responses, dtype="<f8").tobytes())


def read_tlmx(
    path: PathLike, weight: float = 1.0, family: LossFamily = LossFamily.SQUARED_IDENTITY
) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise StorageError(f"{path}: file shorter than the .tlmx header")
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    if bytes(header["magic"]) != MAGIC:
        raise StorageError(f"{path}: bad magic {bytes(header['magic'])!r}")
    if int(header["dtype"]) != FLOAT64:
        raise StorageError(f"{path}: unsupported dtype code {int(header['dtype'])}")
    d1, d2, n = int(header["d1"]), int(header["d2"]), int(header["n"])
    expected = HEADER.itemsize + 8 * n * (d1 * d2 + 1)
    if len(raw) != expected:
        raise StorageError(f"{path}: expected {expected} bytes, found {len(raw)}")
    body = np.frombuffer(raw[HEADER.itemsize :], dtype="<f8")
    covariates = body[: n * d1 * d2].reshape(n, d1, d2)
    responses = body[n * d1 * d2 :]
    return Dataset(covariates, responses, weight=weight, family=family)


def _dataset_file(k: int, matrix: bool) -> str:
    return f"dataset_{k:02d}.{'tlmx' if matrix else 'csv'}"


def save_study(study: GeneratedStudy, directory: PathLike) -> Path:
    """Write every dataset plus ``study.json``; returns the manifest path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    entries: List[Dict[str, Any]] = []
    for k, d in enumerate(study.datasets):
        name = _dataset_file(k, d.is_matrix)
        if d.is_matrix:
            write_tlmx(d, root / name)
        else:
            write_csv_dataset(d, root / name)
        role = "target" if k == 0 else "source"
        entries.append({"file": name, "n": d.n, "weight": d.weight, "role": role})

    manifest = {
        "format": STUDY_FORMAT,
        "version": __version__,
        "family": study.target.family.value,
        "shape": list(study.target.param_shape),
        "datasets": entries,
        "true_coeffs": [theta.values.tolist() for theta in study.true_coeffs],
        "true_informative": list(study.true_informative),
        "scenario": study.config.to_dict(),
    }
    path = root / STUDY_FILE
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info("wrote study with %d datasets to %s", len(entries), root)
    return path


def load_datasets(directory: PathLike) -> List[Dataset]:
    return load_study(directory).datasets


def load_study(directory: PathLike) -> GeneratedStudy:
    root = Path(directory)
    path = root / STUDY_FILE
    try:
        manifest = json.loads(path.read_text())
    except OSError as e:
        raise StorageError(f"{path}: cannot read study manifest: {e}") from e
    except json.JSONDecodeError as e:
        raise StorageError(f"{path}: malformed study manifest: {e}") from e
    if manifest.get("format") != STUDY_FORMAT:
        raise StorageError(f"{path}: unsupported study format {manifest.get('format')!r}")

    family = LossFamily.parse(manifest["family"])
    datasets = []
    for entry in manifest["datasets"]:
        file = root / entry["file"]
        reader = read_tlmx if file.suffix == ".tlmx" else read_csv_dataset
        d = reader(file, weight=entry.get("weight", 1.0), family=family)
        if d.n != entry.get("n", d.n):
            raise StorageError(f"{file}: manifest says n={entry['n']}, file holds {d.n}")
        datasets.append(d)
    return GeneratedStudy(
        config=ScenarioConfig.from_dict(manifest["scenario"]),
        datasets=datasets,
        true_coeffs=[Parameter(np.asarray(c)) for c in manifest["true_coeffs"]],
        true_informative=[bool(f) for f in manifest["true_informative"]],
    )
