"""Punto de entrada del CLI ``superburst``.

Exit codes: 0 éxito, 2 entrada inválida (argparse, descriptores, rangos),
3 fallo numérico.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from .api.deps import run_context
from .api.router import register_all
from .core.config import get_settings
from .core.errors import ConfigError, InvalidInputError, NumericalError
from .core.version import APP_VERSION

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def create_app() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superburst",
        description="Factibilidad de superradiancia de Dicke en arreglos ordenados",
    )
    parser.add_argument("--version", action="version", version=APP_VERSION)
    parser.add_argument("--out", help="Directorio de salida (default: out_dir de config)")
    parser.add_argument("--threads", type=int, help="Hilos para barridos")
    parser.add_argument("--tol", type=float, help="Tolerancia PSD")
    parser.add_argument("--seed", type=int, help="Semilla para sorteos auxiliares")
    parser.add_argument(
        "--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Nivel de log"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_all(subparsers)
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_app()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    try:
        settings = get_settings(threads_override=args.threads)
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _configure_logging(args.log_level or settings.log_level)

    try:
        with run_context(args, settings, argv) as ctx:
            code = args.handler(args, ctx)
    except (InvalidInputError, ValidationError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        logger.error("Fallo numérico en %s: %s", args.command, exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return code


if __name__ == "__main__":
    sys.exit(main())
