import pytest
from pydantic import ValidationError

from narylab.config import Settings

ENV_NAMES = (
    "NARYLAB_THREADS",
    "NARYLAB_BUDGET",
    "NARYLAB_ORACLE_CAP",
    "NARYLAB_EXPECTED_DISCREPANCIES",
    "LOG_LEVEL",
)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in ENV_NAMES:
        monkeypatch.delenv(name, raising=False)


def test_defaults() -> None:
    settings = Settings(_env_file=None)
    assert settings.threads == 1
    assert settings.budget == 81
    assert settings.oracle_cap == 4
    assert settings.expected_discrepancies is None
    assert settings.log_level == "WARNING"


def test_environment_aliases(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("NARYLAB_THREADS", "8")
    monkeypatch.setenv("NARYLAB_BUDGET", "256")
    monkeypatch.setenv("NARYLAB_ORACLE_CAP", "3")
    monkeypatch.setenv("NARYLAB_EXPECTED_DISCREPANCIES", "/tmp/expected.json")
    settings = Settings(_env_file=None)
    assert settings.threads == 8
    assert settings.budget == 256
    assert settings.oracle_cap == 3
    assert settings.expected_discrepancies == "/tmp/expected.json"


def test_field_names_are_accepted() -> None:
    assert Settings(_env_file=None, threads=3).threads == 3


def test_non_positive_threads_rejected(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("NARYLAB_THREADS", "0")
    with pytest.raises(ValidationError):
        Settings(_env_file=None)


def test_log_level_is_normalised(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("LOG_LEVEL", " debug ")
    assert Settings(_env_file=None).log_level == "DEBUG"


def test_unknown_log_level_rejected(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("LOG_LEVEL", "verbose")
    with pytest.raises(ValidationError, match="未知的日志级别"):
        Settings(_env_file=None)
