import json
import os

import pytest
from hypothesis import HealthCheck, settings

from src.sim.strata import StrataSpec
from src.tables import BASE_SPEC, DILUTION_SPEC

settings.register_profile(
    "late-power",
    suppress_health_check=[HealthCheck.function_scoped_fixture],
    deadline=None,
)
settings.load_profile("late-power")


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """Keep user-level .env files and LATE_POWER_* variables out of tests"""
    for key in list(os.environ):
        if key.startswith("LATE_POWER_") or key == "LOG_LEVEL":
            monkeypatch.delenv(key, raising=False)
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.setenv("LATE_POWER_THREADS", "1")
    return home


@pytest.fixture
def b1_spec() -> StrataSpec:
    return BASE_SPEC


@pytest.fixture
def dilution_spec() -> StrataSpec:
    return DILUTION_SPEC


@pytest.fixture
def single_stratum_spec() -> StrataSpec:
    return StrataSpec(
        mu_c0=0.0,
        sd_c0=8.0,
        sd_c1=8.0,
        tau=2.0,
        mu_nt=0.0,
        sd_nt=1.0,
        mu_at=0.0,
        sd_at=1.0,
        p_c=1.0,
        p_nt=0.0,
        p_at=0.0,
    )


@pytest.fixture
def b4_first_spec() -> StrataSpec:
    return StrataSpec(
        mu_c0=0.0,
        sd_c0=8.0,
        sd_c1=8.0,
        tau=5.0,
        mu_nt=0.0,
        sd_nt=8.0,
        mu_at=5.0,
        sd_at=8.0,
        p_c=0.2,
        p_nt=0.4,
        p_at=0.4,
    )


@pytest.fixture
def write_json(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write
