"""Barridos de γ_s(N) y ajustes de escala.

Cada punto del barrido es independiente: se reparte en un
ThreadPoolExecutor y las filas vuelven ordenadas por índice de entrada.
Un fallo numérico en un punto queda registrado en su fila sin abortar el
barrido.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.core.errors import NumericalError
from app.schemas.interaction import INTERACTION_ADAPTER, SCALAR_KINDS
from app.schemas.lattice import LatticeSpec, chain, hypercube
from app.services import correlation_service, lattice_sums_service
from app.services.decoherence_service import ModelError

logger = logging.getLogger(__name__)

PLATEAU_TOLERANCE = 2e-3


@dataclass(slots=True, frozen=True)
class CriticalRow:
    n_sites: int
    gamma_s: Optional[float]
    method: str
    error: Optional[str] = None


def reference_model(kind: str):
    """Modelo con γ = 1; γ_s sólo depende del tipo."""
    if kind not in SCALAR_KINDS:
        raise ModelError(f"El barrido crítico requiere nn, exp, power o dicke, no {kind!r}")
    return INTERACTION_ADAPTER.validate_python({"kind": kind, "gamma": 1.0})


def sweep_lattices(dimension: int, sizes: Sequence[float], periodic: bool = False) -> list[LatticeSpec]:
    """Hipercubos de lado round(N^{1/D}) (anillos si ``periodic``), sin repetir N."""
    if periodic and dimension != 1:
        raise ModelError("El barrido periódico sólo existe en 1D")
    seen: set[int] = set()
    out: list[LatticeSpec] = []
    for size in sizes:
        side = max(2, int(round(float(size) ** (1.0 / dimension))))
        if periodic:
            side = max(3, side)
            lattice = chain(side, periodic=True)
        else:
            lattice = hypercube(dimension, side)
        if lattice.n_sites in seen:
            continue
        seen.add(lattice.n_sites)
        out.append(lattice)
    return out


def _row(model, lattice: LatticeSpec, tol: float) -> CriticalRow:
    n = lattice.n_sites
    try:
        result = correlation_service.gamma_s(model, lattice, tol)
    except (NumericalError, ValueError) as exc:
        logger.warning("γ_s falló en N=%d: %s", n, exc)
        return CriticalRow(n_sites=n, gamma_s=None, method="error", error=str(exc))
    return CriticalRow(n_sites=n, gamma_s=result.value, method=result.method)


def critical_sweep(
    kind: str,
    dimension: int,
    sizes: Sequence[float],
    *,
    periodic: bool = False,
    tol: float = 1e-10,
    threads: int = 1,
) -> list[CriticalRow]:
    model = reference_model(kind)
    lattices = sweep_lattices(dimension, sizes, periodic)
    logger.info(
        "Barrido γ_s: %s D=%d, %d puntos (N=%d..%d)",
        kind,
        dimension,
        len(lattices),
        lattices[0].n_sites,
        lattices[-1].n_sites,
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda lat: _row(model, lat, tol), lattices))


# ---------------------------------------------------------------------------
# Análisis del barrido
# ---------------------------------------------------------------------------

def _valid(rows: Sequence[CriticalRow]) -> tuple[np.ndarray, np.ndarray]:
    good = [r for r in rows if r.gamma_s is not None]
    n = np.array([r.n_sites for r in good], dtype=float)
    g = np.array([r.gamma_s for r in good], dtype=float)
    return n, g


def detect_plateau(
    rows: Sequence[CriticalRow], tolerance: float = PLATEAU_TOLERANCE
) -> Optional[float]:
    """Media de la cola del barrido si su rango cabe en ±tolerance; None si no."""
    _, g = _valid(rows)
    if g.shape[0] < 3:
        return None
    tail = g[-max(3, g.shape[0] // 3) :]
    if float(tail.max() - tail.min()) > 2.0 * tolerance:
        return None
    return float(tail.mean())


def loglog_slope(rows: Sequence[CriticalRow]) -> Optional[float]:
    """Pendiente de ln γ_s contra ln N."""
    n, g = _valid(rows)
    if n.shape[0] < 2:
        return None
    slope, _ = np.polyfit(np.log(n), np.log(g), 1)
    return float(slope)


def scaled_variation(rows: Sequence[CriticalRow], exponent: float) -> Optional[float]:
    """(max - min)/media de γ_s·N^exponent."""
    n, g = _valid(rows)
    if n.shape[0] < 2:
        return None
    scaled = g * n**exponent
    return float((scaled.max() - scaled.min()) / scaled.mean())


def d_scaling(d_min: int, d_max: int) -> dict:
    """γ_s bulk exponencial para D = d_min..d_max y su exponente log-log."""
    if d_min < 1 or d_max <= d_min:
        raise ModelError(f"Rango de dimensiones inválido: {d_min}:{d_max}")
    dims = list(range(d_min, d_max + 1))
    values = [lattice_sums_service.bulk_gamma_s_exponential(d) for d in dims]
    exponent = lattice_sums_service.fit_d_scaling(dims, values)
    logger.info("Escala en D: exponente %.4f sobre D=%d..%d", exponent, d_min, d_max)
    return {
        "dimensions": dims,
        "gamma_s": values,
        "exponent": exponent,
    }


def summarize(kind: str, dimension: int, rows: Sequence[CriticalRow]) -> dict:
    summary: dict = {
        "model": kind,
        "dimension": dimension,
        "points": len(rows),
        "failed": sum(1 for r in rows if r.method == "error"),
        "without_transition": sum(1 for r in rows if r.method == "none"),
        "plateau": detect_plateau(rows),
        "loglog_slope": loglog_slope(rows),
    }
    model = reference_model(kind)
    try:
        limit = correlation_service.gamma_s(
            model, hypercube(dimension, 2), asymptotic=True
        ).value
    except ModelError:
        limit = None
    summary["asymptotic_gamma_s"] = limit
    if kind == "power" and dimension == 3:
        summary["scaled_variation"] = scaled_variation(rows, 1.0 / 6.0)
    if kind == "power" and dimension == 2:
        n, _ = _valid(rows)
        if n.shape[0] >= 2:
            a, b = lattice_sums_service.fit_powerlaw_2d_constants([int(x) for x in n])
            summary["powerlaw_2d_constants"] = {"A": a, "B": b}
    if kind == "exp" and summary["plateau"] is not None:
        summary["kappa_d"] = -math.log(summary["plateau"])
    return summary
