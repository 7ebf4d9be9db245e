import argparse

from app.services import validation_service

from .deps import RunContext

EXIT_CHECK_FAILED = 3


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="Batería rápida de consistencia")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    results = validation_service.run_checks(ctx.seed)
    ctx.emit("validate.json", results)
    return 0 if results["passed"] else EXIT_CHECK_FAILED
