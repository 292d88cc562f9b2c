import pytest

from tlmest.common.config import DEFAULT_HESSIAN_CAP, get_settings
from tlmest.common.errors import ConfigError, InvalidInputError, StorageError, TlmestError
from tlmest.common.observability import get_logger, traced


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("TLMEST_SEED", "12")
    monkeypatch.setenv("TLMEST_JOBS", "0")
    monkeypatch.setenv("TLMEST_LOG_LEVEL", "debug")
    monkeypatch.delenv("TLMEST_HESSIAN_CAP", raising=False)
    settings = get_settings()
    assert settings.seed == 12
    assert settings.jobs == 1
    assert settings.log_level == "DEBUG"
    assert settings.hessian_cap == DEFAULT_HESSIAN_CAP


def test_bad_integer_setting(monkeypatch):
    monkeypatch.setenv("TLMEST_JOBS", "many")
    with pytest.raises(ConfigError):
        get_settings()


def test_error_hierarchy():
    assert issubclass(InvalidInputError, ValueError)
    assert issubclass(StorageError, OSError)
    assert all(issubclass(e, TlmestError) for e in (ConfigError, StorageError))


def test_traced_reports_elapsed_time():
    with traced("tests.unit", size=3) as info:
        info["steps"] = 2
    assert info["steps"] == 2
    assert info["seconds"] >= 0


def test_traced_propagates_errors():
    with pytest.raises(InvalidInputError):
        with traced("tests.failing"):
            raise InvalidInputError("bad")


def test_service_logger_is_shared():
    assert get_logger() is get_logger()
