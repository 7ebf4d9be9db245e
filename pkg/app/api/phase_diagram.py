import argparse

from app.services import phase_diagram_service

from .deps import RunContext


def register(subparsers) -> None:
    parser = subparsers.add_parser("phase-diagram", help="Regiones del anillo NNN en (γ₁, γ₂)")
    parser.add_argument("family", choices=("nnn",))
    parser.add_argument("--res", type=float, default=1e-3, help="Paso de la grilla")
    parser.add_argument("--n-check", type=int, default=101, help="N del anillo finito")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    ctx.descriptors["model"] = args.family
    ctx.descriptors["lattice"] = f"1:{args.n_check}:periodic"
    diagram = phase_diagram_service.build_phase_diagram(
        args.res, args.n_check, ctx.tol, ctx.threads
    )
    ctx.writer.write_csv(
        "phase_diagram.csv", ("g1", "g2", "class", "finite_class"), diagram.rows()
    )
    ctx.emit("phase_diagram.json", phase_diagram_service.summarize(diagram))
    return 0
