import argparse

from app.core.errors import InvalidInputError
from app.schemas.interaction import AllToAll
from app.services import (
    correlation_service,
    descriptor_service,
    dicke_service,
    dynamics_service,
    spectral_service,
)
from app.services.decoherence_service import build_decoherence

from .deps import RunContext, add_model_lattice_args, model_and_lattice


def register(subparsers) -> None:
    parser = subparsers.add_parser("dynamics", help="Tasa de emisión R(t) y detección de burst")
    add_model_lattice_args(parser)
    parser.add_argument("--tmax", type=float, default=5.0)
    parser.add_argument("--points", type=int, default=400)
    parser.add_argument("--J", dest="coupling", default="none", help="none | all:J | custom:ARCHIVO")
    parser.add_argument("--state", default="fully_excited", help="fully_excited | product:theta=..,phi=..")
    parser.add_argument("--solver", choices=("exact", "dicke"), default="exact")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    model, lattice = model_and_lattice(args, ctx)
    state = descriptor_service.parse_state(args.state)
    coupling_spec = descriptor_service.parse_coupling(args.coupling)
    grid = dynamics_service.default_time_grid(args.tmax, args.points)

    extra: dict = {
        "state": descriptor_service.format_state(state),
        "coupling": descriptor_service.format_coupling(coupling_spec),
    }
    if args.solver == "dicke":
        if not isinstance(model, AllToAll):
            raise InvalidInputError("--solver dicke requiere --model dicke:gamma=..")
        if state.kind != "fully_excited" or coupling_spec.kind != "none":
            raise InvalidInputError("--solver dicke sólo admite estado excitado y sin J")
        trace = dicke_service.dicke_local_evolve(
            lattice.n_sites, model.gamma, grid, settings=ctx.settings
        )
    else:
        gamma = build_decoherence(model, lattice)
        coupling = coupling_spec.build(lattice.n_sites)
        trace = dynamics_service.lindblad_evolve(
            gamma, coupling, state, grid, settings=ctx.settings
        )
        extra["rdot0_generator"] = dynamics_service.exact_rdot0(
            gamma, coupling, state, settings=ctx.settings
        )
        if state.kind == "fully_excited":
            summary = spectral_service.analyze(gamma, ctx.tol)
            extra["rdot0_traces"] = correlation_service.rdot0(summary)

    ctx.writer.write_csv("dynamics.csv", ("t", "R"), trace.to_rows())
    report = dynamics_service.detect_burst(trace, ctx.settings.burst_threshold)
    payload = report.model_dump()
    payload.update(extra)
    payload["diagnostics"] = trace.diagnostics
    payload["initial_rate"] = trace.initial_rate
    ctx.emit("dynamics.json", payload)
    return 0
