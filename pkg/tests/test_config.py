import pytest

from src.config import (
    Config,
    get_config_dir,
    load_config_from_user_dir,
)


def test_defaults():
    config = Config()
    assert (config.ALPHA, config.BETA, config.P_Z) == (0.05, 0.2, 0.5)
    assert config.REPS == 5000
    assert config.SWEEP_REPS == 10000
    assert config.ROUND_MODE == "ceil"
    assert config.PROGRESS is False
    config.validate()


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LATE_POWER_REPS", "123")
    monkeypatch.setenv("LATE_POWER_ROUND", "NEAREST")
    monkeypatch.setenv("LATE_POWER_PROGRESS", "yes")
    config = Config()
    assert config.REPS == 123
    assert config.ROUND_MODE == "nearest"
    assert config.PROGRESS is True


@pytest.mark.parametrize(
    "key, value",
    [
        ("LATE_POWER_ALPHA", "1.5"),
        ("LATE_POWER_PZ", "0"),
        ("LATE_POWER_REPS", "0"),
        ("LATE_POWER_THREADS", "-1"),
        ("LATE_POWER_CHUNK_SIZE", "0"),
        ("LATE_POWER_ROUND", "floor"),
        ("LATE_POWER_OUTCOME_SD", "-1"),
    ],
)
def test_validate_rejects(monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ValueError, match=key):
        Config().validate()


def test_resolve_workers(monkeypatch):
    assert Config().resolve_workers() == 1
    monkeypatch.setenv("LATE_POWER_THREADS", "0")
    assert Config().resolve_workers() >= 1


def test_user_dir_env_file(monkeypatch, isolated_env):
    assert get_config_dir() == isolated_env / ".late-power"
    assert not load_config_from_user_dir()

    get_config_dir().mkdir()
    (get_config_dir() / ".env").write_text(
        "LATE_POWER_SEED=77\n", encoding="utf-8"
    )
    # registers LATE_POWER_SEED for removal at teardown
    monkeypatch.setenv("LATE_POWER_SEED", "0")
    monkeypatch.delenv("LATE_POWER_SEED")
    assert load_config_from_user_dir()
    assert Config().SEED == 77
