"""Batería rápida de consistencia entre fórmulas cerradas y cálculo numérico.

Cada chequeo devuelve (ok, detalle). ``run_checks`` nunca lanza: un error
inesperado cuenta como fallo del chequeo correspondiente.
"""
from __future__ import annotations

import logging
import math
from functools import partial
from typing import Callable

import numpy as np

from app.core.errors import SuperburstError
from app.schemas.interaction import AllToAll, Exponential, NearestNeighbor, NextNearestRing
from app.schemas.lattice import LatticeSpec, chain, hypercube
from app.services import (
    bounds_service,
    correlation_service,
    dicke_service,
    dynamics_service,
    phase_diagram_service,
    spectral_service,
)
from app.services.decoherence_service import build_decoherence

logger = logging.getLogger(__name__)

_RANDOM_DRAWS = 3


def _dicke_g2() -> tuple[bool, str]:
    gamma = build_decoherence(AllToAll(gamma=1.0), chain(4))
    g2 = correlation_service.g2_zero(spectral_service.analyze(gamma))
    return abs(g2 - 1.5) < 1e-12, f"g2={g2!r}"


def _nn_unphysical() -> tuple[bool, str]:
    gamma = build_decoherence(NearestNeighbor(gamma=0.6), chain(10))
    summary = spectral_service.analyze(gamma)
    return not summary.is_physical, f"min_eigenvalue={summary.min_eigenvalue!r}"


def _nn_thresholds() -> tuple[bool, str]:
    worst = math.inf
    for n in range(3, 513):
        gp = 0.5 / math.cos(math.pi / (n + 1))
        gs = correlation_service.nn_chain_gamma_s(n)
        worst = min(worst, gs - gp)
    return worst > 0, f"min(gamma_s - gamma_p)={worst!r}"


def _closed_form_spectra() -> tuple[bool, str]:
    cases = [
        (NearestNeighbor(gamma=0.3), chain(64)),
        (NearestNeighbor(gamma=0.2), LatticeSpec(dimension=2, extents=(5, 7))),
        (Exponential(gamma=0.5), chain(33, periodic=True)),
        (NextNearestRing(g1=0.4, g2=0.2), chain(31, periodic=True)),
    ]
    worst = 0.0
    for model, lattice in cases:
        closed = spectral_service.closed_form_spectrum(model, lattice)
        numeric = spectral_service.analyze(build_decoherence(model, lattice)).eigenvalues
        worst = max(worst, float(np.max(np.abs(closed - numeric))))
    return worst < 1e-9, f"max_deviation={worst!r}"


def _brute_force_nn() -> tuple[bool, str]:
    gamma = build_decoherence(NearestNeighbor(gamma=0.25), hypercube(2, 3))
    top = bounds_service.brute_force_hgamma_max(gamma)
    return abs(top - 9.0) < 1e-9, f"lambda_max={top!r}"


def _nn_random_no_burst(rng: np.random.Generator) -> tuple[bool, str]:
    """λ_max(H_Γ) = N para γ sorteado en [0, 1/(2D)] sobre redes chicas."""
    worst = 0.0
    for lattice in (chain(6), LatticeSpec(dimension=2, extents=(2, 3)), hypercube(3, 2)):
        for g in rng.uniform(0.0, 1.0 / (2 * lattice.dimension), size=_RANDOM_DRAWS):
            gamma = build_decoherence(NearestNeighbor(gamma=float(g)), lattice)
            top = bounds_service.brute_force_hgamma_max(gamma)
            worst = max(worst, abs(top - lattice.n_sites) / lattice.n_sites)
    return worst < 1e-9, f"max_rel_deviation={worst!r}"


def _rdot0_trace_vs_generator() -> tuple[bool, str]:
    gamma = build_decoherence(Exponential(gamma=0.5), chain(5, periodic=True))
    from_traces = correlation_service.rdot0(spectral_service.analyze(gamma))
    from_generator = dynamics_service.exact_rdot0(gamma)
    diff = abs(from_traces - from_generator)
    return diff < 1e-9 * max(1.0, abs(from_traces)), f"diff={diff!r}"


def _one_jump_average() -> tuple[bool, str]:
    gamma = build_decoherence(Exponential(gamma=0.6), chain(6))
    summary = spectral_service.analyze(gamma)
    average = correlation_service.one_jump_average_rate(gamma)
    expected = summary.n_sites * correlation_service.g2_zero(summary)
    return abs(average - expected) < 1e-9 * expected, f"average={average!r}"


def _g3_window_onset() -> tuple[bool, str]:
    opens = correlation_service.g3_window(7) is not None
    closed = correlation_service.g3_window(6) is None
    return opens and closed, f"N=7 open={opens}, N=6 closed={closed}"


def _nnn_min_gamma2() -> tuple[bool, str]:
    diagram = phase_diagram_service.build_phase_diagram(5e-3, n_check=21)
    measured = phase_diagram_service.summarize(diagram)["min_g2_superradiant"]
    expected = correlation_service.nnn_min_gamma2()
    return measured is not None and abs(measured - expected) <= 1e-2, f"min_g2={measured!r}"


def _dicke_small_no_burst() -> tuple[bool, str]:
    gamma = (1.0 - 1e-4) / math.sqrt(5.0)
    trace = dicke_service.dicke_local_evolve(6, gamma, dynamics_service.default_time_grid(2.0))
    report = dynamics_service.detect_burst(trace)
    return not report.has_burst, f"fractional_increase={report.fractional_increase!r}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "dicke_g2_n4": _dicke_g2,
    "nn_chain_unphysical": _nn_unphysical,
    "nn_chain_gamma_p_below_gamma_s": _nn_thresholds,
    "closed_form_spectra": _closed_form_spectra,
    "brute_force_nn_square": _brute_force_nn,
    "rdot0_traces_vs_generator": _rdot0_trace_vs_generator,
    "one_jump_average": _one_jump_average,
    "g3_window_onset": _g3_window_onset,
    "nnn_min_gamma2": _nnn_min_gamma2,
    "dicke_local_small_n": _dicke_small_no_burst,
}

# chequeos que sortean parámetros con la semilla de la corrida
SEEDED_CHECKS: dict[str, Callable[[np.random.Generator], tuple[bool, str]]] = {
    "nn_random_no_burst": _nn_random_no_burst,
}


def run_checks(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    checks: dict[str, Callable[[], tuple[bool, str]]] = dict(CHECKS)
    for name, seeded in SEEDED_CHECKS.items():
        checks[name] = partial(seeded, rng)

    results: dict = {}
    for name, check in checks.items():
        try:
            ok, detail = check()
        except (SuperburstError, ValueError, ArithmeticError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        level = logging.INFO if ok else logging.WARNING
        logger.log(level, "validate %s: %s (%s)", name, "ok" if ok else "FALLA", detail)
        results[name] = {"passed": bool(ok), "detail": detail}
    results_ok = all(r["passed"] for r in results.values())
    return {"passed": results_ok, "seed": seed, "checks": results}
