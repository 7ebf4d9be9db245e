"""Versión de la librería y de las dependencias numéricas.

La versión sale del archivo VERSION en la raíz del repo ('dev' si falta).
El manifiesto de cada corrida registra también las versiones de numpy y
scipy.
"""
from pathlib import Path

import numpy as np
import scipy

_VERSION_FILE = Path(__file__).resolve().parents[2] / "VERSION"


def read_version_file(path: Path = _VERSION_FILE) -> str:
    try:
        text = path.read_text(encoding="utf-8").strip()
    except OSError:
        return "dev"
    return text or "dev"


def runtime_versions() -> dict[str, str]:
    return {
        "superburst": APP_VERSION,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


APP_VERSION: str = read_version_file()
