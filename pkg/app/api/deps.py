"""Contexto compartido por los subcomandos del CLI.

``run_context`` abre la corrida y, si el subcomando termina bien, escribe el
manifiesto con los checksums de todo lo emitido. Si falla no se escribe
manifiesto.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Generator, Optional, Sequence

from app.core.config import Settings
from app.core.version import runtime_versions
from app.schemas.run import RunManifest
from app.services import descriptor_service
from app.services.export_service import OutputWriter, json_text


@dataclass
class RunContext:
    settings: Settings
    tol: float
    threads: int
    seed: int
    writer: OutputWriter
    descriptors: dict[str, str] = field(default_factory=dict)

    def emit(self, name: str, payload: Any) -> None:
        """Escribe ``name`` en el directorio de salida y lo repite por stdout."""
        self.writer.write_json(name, payload)
        sys.stdout.write(json_text(payload))


def model_and_lattice(args: argparse.Namespace, ctx: RunContext):
    """Parsea --model/--lattice y registra su forma canónica en el manifiesto."""
    model = descriptor_service.parse_model(args.model)
    lattice = descriptor_service.parse_lattice(args.lattice)
    ctx.descriptors["model"] = descriptor_service.format_model(model)
    ctx.descriptors["lattice"] = descriptor_service.format_lattice(lattice)
    return model, lattice


def add_model_lattice_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="kind:k=v,... (ej. nn:gamma=0.3)")
    parser.add_argument("--lattice", required=True, help="D:n1xn2[:periodic][:d=x]")


@contextmanager
def run_context(
    args: argparse.Namespace, settings: Settings, argv: Optional[Sequence[str]] = None
) -> Generator[RunContext, None, None]:
    out_dir = Path(args.out or settings.out_dir)
    tol = args.tol if args.tol is not None else settings.psd_tolerance
    ctx = RunContext(
        settings=replace(settings, psd_tolerance=tol),
        tol=tol,
        threads=settings.threads,
        seed=args.seed if args.seed is not None else settings.seed,
        writer=OutputWriter(out_dir),
    )
    yield ctx
    manifest = RunManifest(
        command=["superburst", *(argv if argv is not None else sys.argv[1:])],
        subcommand=args.command,
        model=ctx.descriptors.get("model"),
        lattice=ctx.descriptors.get("lattice"),
        versions=runtime_versions(),
        tolerances={
            "psd": ctx.tol,
            "ode_rtol": settings.ode_rtol,
            "ode_atol": settings.ode_atol,
            "burst_threshold": settings.burst_threshold,
        },
        seed=ctx.seed,
    )
    ctx.writer.write_manifest(manifest)
