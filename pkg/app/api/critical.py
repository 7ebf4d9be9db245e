import argparse

from app.services import critical_service, descriptor_service
from app.services.descriptor_service import DescriptorError

from .deps import RunContext


def _dimension_range(text: str) -> tuple[int, int]:
    low, _, high = text.partition(":")
    try:
        return int(low), int(high)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"se esperaba D1:D2, no {text!r}") from exc


def register(subparsers) -> None:
    parser = subparsers.add_parser("critical", help="Barrido de γ_s(N) y ajuste de escala")
    parser.add_argument("--model", required=True, help="nn | exp | power | dicke")
    parser.add_argument("--dimension", type=int, default=1)
    parser.add_argument(
        "--sweep", default="N=10:1000000:log", help="N=start:stop[:steps][:log][:par=K]"
    )
    parser.add_argument("--boundary", choices=("open", "periodic"), default="open")
    parser.add_argument("--d-scaling", type=_dimension_range, metavar="D1:D2")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    sweep = descriptor_service.parse_sweep(args.sweep)
    if sweep.parameter != "N":
        raise DescriptorError(f"El barrido crítico recorre N, no {sweep.parameter!r}")
    ctx.descriptors["model"] = args.model
    ctx.descriptors["lattice"] = f"{args.dimension}:sweep:{args.boundary}"

    rows = critical_service.critical_sweep(
        args.model,
        args.dimension,
        sweep.values(),
        periodic=args.boundary == "periodic",
        tol=ctx.tol,
        threads=sweep.parallelism or ctx.threads,
    )
    ctx.writer.write_csv(
        "critical.csv",
        ("N", "gamma_s", "method"),
        ((r.n_sites, r.gamma_s, r.method) for r in rows),
    )
    summary = critical_service.summarize(args.model, args.dimension, rows)
    summary["sweep"] = descriptor_service.format_sweep(sweep)
    if args.d_scaling:
        summary["d_scaling"] = critical_service.d_scaling(*args.d_scaling)
    ctx.emit("critical.json", summary)
    return 0
