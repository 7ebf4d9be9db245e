import argparse

from . import bounds, critical, dynamics, g2, meanfield, phase_diagram, spectrum, validate

SUBCOMMANDS = (spectrum, g2, critical, phase_diagram, dynamics, bounds, meanfield, validate)


def register_all(subparsers: argparse._SubParsersAction) -> None:
    for module in SUBCOMMANDS:
        module.register(subparsers)
