"""Declarative JSON run configuration for the command-line front end."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from tlmest.common.errors import ConfigError
from tlmest.common.schema import check_keys, from_mapping
from tlmest.core import Regularizer
from tlmest.datagen import ScenarioConfig
from tlmest.experiments import EstimatorSettings
from tlmest.selection import SelectionConfig
from tlmest.transfer import TransferConfig
from tlmest.tuning import TuningGrid


@dataclass(frozen=True)
class IOConfig:
    data: Optional[str] = None
    output: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    """
    One JSON document holding every section a command may read.

    Args:
        seed: master seed; TLMEST_SEED and --seed take precedence
        jobs: worker processes for experiments
        scenario: study generator settings (generate)
        transfer: pooled penalty and fine-tuning (transfer)
        selection: truncated-penalty settings (select)
        tuning: cross-validation grid (fit without --lambda)
        estimators: tuning settings of experiment estimators
        io: default data and output paths
    """

    seed: int = 0
    jobs: Optional[int] = None
    scenario: Optional[ScenarioConfig] = None
    transfer: Optional[TransferConfig] = None
    selection: Optional[SelectionConfig] = None
    tuning: Optional[TuningGrid] = None
    estimators: EstimatorSettings = field(default_factory=EstimatorSettings)
    io: IOConfig = field(default_factory=IOConfig)

    def __post_init__(self) -> None:
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.jobs is not None and (int(self.jobs) != self.jobs or self.jobs < 1):
            raise ConfigError(f"jobs must be an integer >= 1, got {self.jobs!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        check_keys(cls, data)
        values: Dict[str, Any] = dict(data)
        sections = {
            "scenario": ScenarioConfig.from_dict,
            "transfer": TransferConfig.from_dict,
            "selection": SelectionConfig.from_dict,
            "tuning": TuningGrid.from_dict,
            "estimators": EstimatorSettings.from_dict,
            "io": lambda d: from_mapping(IOConfig, d, "io"),
        }
        for key, build in sections.items():
            section = values.get(key)
            if section is None:
                values.pop(key, None)
            elif isinstance(section, Mapping):
                values[key] = build(section)
            else:
                raise ConfigError(f"'{key}' must be an object")
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def load(cls, path: Union[str, Path, None]) -> "RunConfig":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from e
        return cls.from_dict(data)

    def with_overrides(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return plain(self)


def plain(value: Any) -> Any:
    """JSON-ready form of a config object; it loads back through ``from_dict``."""
    if isinstance(value, Regularizer):
        return value.kind.value
    if isinstance(value, ScenarioConfig):
        return value.to_dict()
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: plain(getattr(value, f.name)) for f in dataclasses.fields(value) if f.init}
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value
