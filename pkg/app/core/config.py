import json
import os
from dataclasses import dataclass
from typing import Optional

from app.core.errors import ConfigError

try:
    # Cargar variables desde .env si existe
    from dotenv import load_dotenv  # type: ignore
except ImportError:  # pragma: no cover - dependencia opcional
    load_dotenv = None  # type: ignore


_ENV_PREFIX = "SUPERBURST_"


@dataclass
class Settings:
    psd_tolerance: float = 1e-10
    threads: int = 1
    out_dir: str = "out"
    seed: int = 0
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    burst_threshold: float = 1e-8
    log_level: str = "INFO"
    # límites de los solvers exactos
    max_exact_sites: int = 12
    max_dicke_sites: int = 50


def _project_root() -> str:
    base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    # app/ -> project root
    return os.path.dirname(base_dir)


def _load_json_config() -> dict:
    config_path = os.path.join(_project_root(), "app", "config.json")
    if os.path.exists(config_path):
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return {}
    return {}


def _pick(name: str, cfg: dict, default):
    """Variable de entorno > config.json > default."""
    raw = os.environ.get(_ENV_PREFIX + name.upper())
    if raw is not None and raw != "":
        return raw
    value = cfg.get(name)
    return default if value is None else value


def _as_int(name: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Valor entero inválido para {name}: {value!r}") from exc


def _as_float(name: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Valor real inválido para {name}: {value!r}") from exc


def get_settings(threads_override: Optional[int] = None) -> Settings:
    """Arma la configuración efectiva.

    ``threads_override`` viene del flag ``--threads`` del CLI; la variable
    ``SUPERBURST_THREADS`` tiene prioridad sobre él.
    """
    # Intentar cargar .env del raíz del proyecto
    if load_dotenv is not None:
        dotenv_path = os.path.join(_project_root(), ".env")
        if os.path.exists(dotenv_path):
            load_dotenv(dotenv_path)

    cfg = _load_json_config()

    env_threads = os.environ.get(_ENV_PREFIX + "THREADS")
    if env_threads:
        threads = _as_int("threads", env_threads)
    elif threads_override is not None:
        threads = int(threads_override)
    else:
        threads = _as_int("threads", cfg.get("threads") or os.cpu_count() or 1)
    if threads < 1:
        raise ConfigError("threads debe ser >= 1")

    psd_tolerance = _as_float("psd_tolerance", _pick("psd_tolerance", cfg, 1e-10))
    ode_rtol = _as_float("ode_rtol", _pick("ode_rtol", cfg, 1e-10))
    ode_atol = _as_float("ode_atol", _pick("ode_atol", cfg, 1e-12))
    burst_threshold = _as_float(
        "burst_threshold", _pick("burst_threshold", cfg, 1e-8)
    )
    if min(psd_tolerance, ode_rtol, ode_atol, burst_threshold) <= 0:
        raise ConfigError("Las tolerancias deben ser positivas")

    return Settings(
        psd_tolerance=psd_tolerance,
        threads=threads,
        out_dir=str(_pick("out_dir", cfg, "out")),
        seed=_as_int("seed", _pick("seed", cfg, 0)),
        ode_rtol=ode_rtol,
        ode_atol=ode_atol,
        burst_threshold=burst_threshold,
        log_level=str(_pick("log_level", cfg, "INFO")).upper(),
        max_exact_sites=_as_int("max_exact_sites", _pick("max_exact_sites", cfg, 12)),
        max_dicke_sites=_as_int("max_dicke_sites", _pick("max_dicke_sites", cfg, 50)),
    )
