import argparse

from app.schemas.interaction import SCALAR_KINDS
from app.services import correlation_service, spectral_service
from app.services.decoherence_service import build_decoherence

from .deps import RunContext, add_model_lattice_args, model_and_lattice


def register(subparsers) -> None:
    parser = subparsers.add_parser("g2", help="g²(0), g³(0), Ṙ(0) y R̈(0) del estado excitado")
    add_model_lattice_args(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    model, lattice = model_and_lattice(args, ctx)
    summary = spectral_service.analyze(build_decoherence(model, lattice), ctx.tol)
    payload = correlation_service.correlation_report(summary).model_dump()
    payload["model"] = ctx.descriptors["model"]
    payload["is_physical"] = summary.is_physical
    if model.kind in SCALAR_KINDS:
        payload["gamma_s"] = correlation_service.gamma_s(model, lattice, ctx.tol).model_dump()
    ctx.emit("g2.json", payload)
    return 0
