import argparse

from app.services import bounds_service
from app.services.decoherence_service import build_decoherence

from .deps import RunContext, add_model_lattice_args, model_and_lattice


def register(subparsers) -> None:
    parser = subparsers.add_parser("bounds", help="Cotas superiores de la tasa de emisión")
    add_model_lattice_args(parser)
    parser.add_argument(
        "--brute-force", action="store_true", help="Agrega λ_max(H_Γ) exacto (N chico)"
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    model, lattice = model_and_lattice(args, ctx)
    bounds = bounds_service.analytic_bounds(model, lattice)
    if args.brute_force:
        gamma = build_decoherence(model, lattice)
        bounds.append(bounds_service.brute_force_bound(gamma, ctx.threads, ctx.settings))
    ctx.emit("bounds.json", [b.model_dump() for b in bounds])
    return 0
