import pytest


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    """Configuración determinista: sin variables SUPERBURST_* del entorno."""
    import os

    for key in list(os.environ):
        if key.startswith("SUPERBURST_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("SUPERBURST_THREADS", "1")
    monkeypatch.setenv("SUPERBURST_OUT_DIR", str(tmp_path / "out"))
