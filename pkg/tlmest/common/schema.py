"""Strict dict -> dataclass construction for JSON run configs."""

from __future__ import annotations

import dataclasses
from typing import Any, Mapping, Type, TypeVar

from .errors import ConfigError

T = TypeVar("T")


def check_keys(cls: Type[Any], data: Mapping[str, Any], context: str = "") -> None:
    """Reject keys that are not init fields of the dataclass ``cls``."""
    if not isinstance(data, Mapping):
        where = context or cls.__name__
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    allowed = {f.name for f in dataclasses.fields(cls) if f.init}
    for key in data:
        if key not in allowed:
            where = f"{context}." if context else ""
            raise ConfigError(f"unknown key '{where}{key}' for {cls.__name__}")


def from_mapping(cls: Type[T], data: Mapping[str, Any], context: str = "") -> T:
    check_keys(cls, data, context)
    try:
        return cls(**dict(data))
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{context or cls.__name__}: {e}") from e
