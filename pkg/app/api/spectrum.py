import argparse

import numpy as np

from app.schemas.interaction import SCALAR_KINDS
from app.services import spectral_service
from app.services.decoherence_service import build_decoherence

from .deps import RunContext, add_model_lattice_args, model_and_lattice


def register(subparsers) -> None:
    parser = subparsers.add_parser("spectrum", help="Espectro de Γ y veredicto PSD")
    add_model_lattice_args(parser)
    parser.add_argument("--eigvecs", metavar="FILE", help="CSV con los autovectores")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, ctx: RunContext) -> int:
    model, lattice = model_and_lattice(args, ctx)
    gamma = build_decoherence(model, lattice)
    summary = spectral_service.analyze(gamma, ctx.tol, with_vectors=bool(args.eigvecs))
    payload = summary.to_dict()
    payload["model"] = ctx.descriptors["model"]
    payload["psd_certificate"] = spectral_service.psd_certificate(gamma, ctx.tol)

    closed = spectral_service.closed_form_spectrum(model, lattice)
    if closed is not None:
        payload["closed_form_max_deviation"] = float(
            np.max(np.abs(closed - summary.eigenvalues))
        )
    if model.kind in SCALAR_KINDS:
        payload["gamma_p"] = spectral_service.gamma_p(model, lattice, ctx.tol)

    if args.eigvecs:
        vectors = summary.eigenvectors
        rows = (
            (k, site, float(vectors[site, k].real), float(vectors[site, k].imag))
            for k in range(vectors.shape[1])
            for site in range(vectors.shape[0])
        )
        ctx.writer.write_csv(args.eigvecs, ("index", "site", "re", "im"), rows)

    ctx.emit("spectrum.json", payload)
    return 0
