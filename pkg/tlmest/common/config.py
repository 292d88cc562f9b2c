"""Load environment configuration for tlmest"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

DEFAULT_HESSIAN_CAP = 4096


def load_env() -> None:
    """Load variables from the repository .env file without clobbering the environment."""
    env_path = Path(__file__).parent.parent.parent / ".env"
    if env_path.exists():
        load_dotenv(env_path, override=False)


def _int_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        from .errors import ConfigError

        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e


@dataclass(frozen=True)
class Settings:
    seed: Optional[int]
    log_level: str
    hessian_cap: int
    jobs: int
    trace_console: bool
    otlp_endpoint: Optional[str]

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            seed=_int_env("TLMEST_SEED", None),
            log_level=os.getenv("TLMEST_LOG_LEVEL", "INFO").strip().upper(),
            hessian_cap=_int_env("TLMEST_HESSIAN_CAP", DEFAULT_HESSIAN_CAP),
            jobs=max(1, _int_env("TLMEST_JOBS", 1)),
            trace_console=os.getenv("TLMEST_TRACE_CONSOLE", "0").strip() in ("1", "true", "yes"),
            otlp_endpoint=os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT") or None,
        )


def get_settings() -> Settings:
    # Re-read on every call so tests can monkeypatch the environment
    return Settings.from_env()


# Load env vars on import
load_env()
