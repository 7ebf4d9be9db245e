import pytest

from app.core.config import get_settings
from app.core.errors import ConfigError


def test_defaults():
    settings = get_settings()
    assert settings.psd_tolerance == 1e-10
    assert settings.ode_rtol == 1e-10
    assert settings.burst_threshold == 1e-8
    assert settings.max_exact_sites == 12
    assert settings.max_dicke_sites == 50
    assert settings.log_level == "INFO"


def test_environment_overrides_config_file(monkeypatch):
    monkeypatch.setenv("SUPERBURST_PSD_TOLERANCE", "1e-8")
    monkeypatch.setenv("SUPERBURST_MAX_EXACT_SITES", "8")
    monkeypatch.setenv("SUPERBURST_LOG_LEVEL", "debug")
    settings = get_settings()
    assert settings.psd_tolerance == 1e-8
    assert settings.max_exact_sites == 8
    assert settings.log_level == "DEBUG"


def test_threads_env_beats_flag(monkeypatch):
    assert get_settings(threads_override=4).threads == 1
    monkeypatch.delenv("SUPERBURST_THREADS")
    assert get_settings(threads_override=4).threads == 4


@pytest.mark.parametrize(
    "name, value",
    [
        ("SUPERBURST_ODE_RTOL", "abc"),
        ("SUPERBURST_MAX_EXACT_SITES", "1.5"),
        ("SUPERBURST_BURST_THRESHOLD", "-1"),
        ("SUPERBURST_THREADS", "0"),
    ],
)
def test_malformed_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError):
        get_settings()
