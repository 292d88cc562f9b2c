"""
Preset Registry - discovers the named experiment presets.

Each folder under ``presets/`` holds a ``preset.py`` with a ``PRESET_DEFINITIONS`` list.
A definition is a dict with ``name``, ``description``, ``scale`` ("full" or "desk") and
``run``, a callable ``run(seed, jobs) -> ExperimentResult``.
"""

from __future__ import annotations

import importlib
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from tlmest.common.errors import ConfigError
from tlmest.common.observability import traced

from .records import ExperimentResult

logger = logging.getLogger(__name__)

SCALES = ("full", "desk")


class PresetRegistry:
    """Registry for experiment presets."""

    def __init__(self):
        self.presets: Dict[str, Dict[str, Any]] = {}

    def discover_presets(self, presets_dir: Optional[Path] = None) -> List[str]:
        """
        Import every ``presets/<folder>/preset.py`` and register its definitions.

        Returns:
            Names of the presets registered by this call
        """
        if presets_dir is None:
            presets_dir = Path(__file__).parent / "presets"

        discovered = []
        for preset_dir in sorted(presets_dir.iterdir()):
            if not preset_dir.is_dir() or preset_dir.name.startswith(("_", ".")):
                continue
            if not (preset_dir / "preset.py").exists():
                logger.debug("no preset.py in %s, skipping", preset_dir.name)
                continue

            module_name = f"tlmest.experiments.presets.{preset_dir.name}.preset"
            module = importlib.import_module(module_name)
            definitions = getattr(module, "PRESET_DEFINITIONS", None)
            if definitions is None:
                logger.warning("no PRESET_DEFINITIONS found in %s", module_name)
                continue
            for definition in definitions:
                self.register(definition)
                discovered.append(definition["name"])
        return discovered

    def register(self, definition: Dict[str, Any]) -> None:
        name = definition.get("name")
        if not name or not callable(definition.get("run")):
            raise ConfigError(f"preset definition {definition!r} needs a name and a run callable")
        if definition.get("scale") not in SCALES:
            raise ConfigError(f"preset '{name}' has scale {definition.get('scale')!r}")
        if name in self.presets and self.presets[name] is not definition:
            raise ConfigError(f"preset '{name}' is defined twice")
        self.presets[name] = definition
        logger.debug("registered preset %s", name)

    def get_preset(self, name: str) -> Dict[str, Any]:
        if not self.presets:
            self.discover_presets()
        try:
            return self.presets[name]
        except KeyError:
            known = ", ".join(sorted(self.presets))
            raise ConfigError(f"unknown preset '{name}' (known: {known})") from None

    def list_presets(self) -> List[str]:
        if not self.presets:
            self.discover_presets()
        return sorted(self.presets)

    def run(self, name: str, seed: int = 0, jobs: Optional[int] = None) -> ExperimentResult:
        """Run a preset and stamp its provenance into the result metadata."""
        definition = self.get_preset(name)
        run: Callable[..., ExperimentResult] = definition["run"]
        with traced("experiments.preset", preset=name, seed=seed) as info:
            result = run(seed=seed, jobs=jobs)
            info.update(
                records=len(result.records),
                failures=len(result.failures),
                non_converged=len(result.non_converged),
            )
        result.metadata.update(
            preset=name,
            description=definition.get("description", ""),
            provenance=f"{definition['scale']}-scale",
            seed=int(seed),
            error_log_base="e",
        )
        return result


# Global registry instance
registry = PresetRegistry()


def initialize_presets(presets_dir: Optional[Path] = None) -> PresetRegistry:
    discovered = registry.discover_presets(presets_dir)
    logger.info("discovered %d presets: %s", len(discovered), ", ".join(discovered))
    return registry


__all__ = ["PresetRegistry", "registry", "initialize_presets"]
