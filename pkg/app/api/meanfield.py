import argparse

import numpy as np

from app.schemas.lattice import chain
from app.services import descriptor_service, dynamics_service, meanfield_service
from app.services.decoherence_service import build_decoherence

from .deps import RunContext


def register(subparsers) -> None:
    parser = subparsers.add_parser("meanfield", help="Cierre de cumulantes en un anillo")
    parser.add_argument("--model", required=True, help="kind:k=v,... (Γ circulante)")
    parser.add_argument("--N", dest="n_sites", type=int, required=True)
    parser.add_argument("--tmax", type=float, default=5.0)
    parser.add_argument("--points", type=int, default=400)
    parser.add_argument("--J", dest="coupling", default="none", help="none | all:J | custom:ARCHIVO")
    parser.add_argument("--state", default="fully_excited")
    parser.add_argument(
        "--compare-exact", action="store_true", help="Compara con la evolución exacta"
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    model = descriptor_service.parse_model(args.model)
    lattice = chain(args.n_sites, periodic=True)
    state = descriptor_service.parse_state(args.state)
    ctx.descriptors["model"] = descriptor_service.format_model(model)
    ctx.descriptors["lattice"] = descriptor_service.format_lattice(lattice)

    gamma = build_decoherence(model, lattice)
    coupling = descriptor_service.parse_coupling(args.coupling).build(lattice.n_sites)
    grid = dynamics_service.default_time_grid(args.tmax, args.points)
    trace = meanfield_service.cumulant_evolve(
        gamma, coupling, state, grid, settings=ctx.settings
    )

    summary: dict = {
        "model": ctx.descriptors["model"],
        "n_sites": lattice.n_sites,
        "initial_rate": trace.initial_rate,
        "peak_rate": float(np.max(trace.rates)),
        "diagnostics": trace.diagnostics,
    }
    if args.compare_exact:
        exact = dynamics_service.lindblad_evolve(
            gamma, coupling, state, grid, settings=ctx.settings
        )
        deviation = np.abs(trace.rates - exact.rates) / np.abs(exact.rates)
        summary["max_relative_deviation"] = float(np.max(deviation))
        ctx.writer.write_csv(
            "meanfield.csv",
            ("t", "R_meanfield", "R_exact"),
            zip(trace.times, trace.rates, exact.rates),
        )
    else:
        ctx.writer.write_csv("meanfield.csv", ("t", "R"), trace.to_rows())
    ctx.emit("meanfield.json", summary)
    return 0
