"""Sumas de red O(N) para Tr Γ² y constantes de escala de γ_s.

Tr Γ² se evalúa sobre clases de desplazamiento (ver
``lattice_service.displacement_classes``) sin construir Γ, lo que permite
barrer N hasta 10⁶ sitios.
"""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from app.schemas.interaction import (
    AllToAll,
    Exponential,
    NearestNeighbor,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec, hypercube
from app.services import lattice_service
from app.services.decoherence_service import ModelError

logger = logging.getLogger(__name__)

# radio máximo para las sumas de red infinitas
BULK_RADIUS = 60


# ---------------------------------------------------------------------------
# Tr Γ² por clases de desplazamiento
# ---------------------------------------------------------------------------

def off_diagonal_weight(model, lattice: LatticeSpec) -> float:
    """S₂ = Σ_{i≠j} |γ_ij/γ|² para modelos con g² cuadrático en γ.

    Vale para nn, power y dicke; para exp devuelve error.
    """
    n = lattice.n_sites
    if isinstance(model, AllToAll):
        return float(n * (n - 1))
    if isinstance(model, NearestNeighbor):
        return 2.0 * lattice_service.expected_nn_pair_count(lattice)
    if isinstance(model, PowerLaw):
        classes = lattice_service.displacement_classes(lattice)
        mask = classes.separations > 0
        return float(np.sum(classes.weights[mask] / classes.separations[mask] ** 2))
    raise ModelError(f"S₂ no es independiente de γ para {model.kind}")


def trace_gamma2_sum(model, lattice: LatticeSpec, gamma: float) -> float:
    """Tr Γ² = N + Σ_{Δ≠0} w_Δ |γ_Δ|² sin construir la matriz."""
    n = lattice.n_sites
    if isinstance(model, Exponential):
        classes = lattice_service.displacement_classes(lattice)
        mask = classes.separations > 0
        if gamma == 0.0:
            return float(n)
        terms = np.power(gamma, 2.0 * classes.separations[mask])
        return float(n + np.sum(classes.weights[mask] * terms))
    return float(n + gamma**2 * off_diagonal_weight(model, lattice))


# ---------------------------------------------------------------------------
# Red infinita (bulk)
# ---------------------------------------------------------------------------

def squared_radius_counts(dimension: int, radius: int = BULK_RADIUS) -> np.ndarray:
    """counts[k] = #{Δ ∈ Z^D : |Δ|² = k} para k ≤ radius²."""
    size = radius * radius + 1
    line = np.zeros(size)
    line[0] = 1.0
    ks = np.arange(1, radius + 1)
    line[ks * ks] = 2.0
    counts = line.copy()
    for _ in range(dimension - 1):
        counts = np.convolve(counts, line)[:size]
    return counts


def bulk_exponential_sum(gamma: float, counts: np.ndarray) -> float:
    """Σ_{Δ≠0} γ^{2|Δ|} truncada al radio de ``counts``."""
    k = np.flatnonzero(counts[1:]) + 1
    return float(np.sum(counts[k] * np.power(gamma, 2.0 * np.sqrt(k))))


def bulk_gamma_s_exponential(dimension: int, radius: int = BULK_RADIUS) -> float:
    """Raíz de Σ_{Δ≠0} γ^{2|Δ|} = 1 en la red Z^D infinita."""
    if dimension < 1:
        raise ModelError("La dimensión debe ser >= 1")
    counts = squared_radius_counts(dimension, radius)
    root = bisect(
        lambda g: bulk_exponential_sum(g, counts) - 1.0, 1e-3, 0.95, xtol=1e-14
    )
    logger.debug("γ_s bulk exponencial D=%d -> %.10f", dimension, root)
    return float(root)


def fit_d_scaling(dimensions: Sequence[int], values: Sequence[float]) -> float:
    """Exponente a de γ_s ∝ D^a por mínimos cuadrados en log-log."""
    slope, _ = np.polyfit(np.log(dimensions), np.log(values), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Constantes ajustadas
# ---------------------------------------------------------------------------

def fit_exponential_hypercube_constant(
    dimension: int, gammas: Sequence[float], radius: int = BULK_RADIUS
) -> float:
    """C en Ṙ(0)/N ≈ 2Dγ²/(1-γ²) - 1 + C/(-ln γ)^D.

    Ṙ(0)/N = Tr Γ²/N - 2 se evalúa con la suma bulk.
    """
    counts = squared_radius_counts(dimension, radius)
    g = np.asarray(gammas, dtype=float)
    lhs = np.array([bulk_exponential_sum(x, counts) - 1.0 for x in g])
    residual = lhs - (2.0 * dimension * g**2 / (1.0 - g**2) - 1.0)
    design = (-np.log(g)) ** (-dimension)
    coef, *_ = np.linalg.lstsq(design[:, None], residual, rcond=None)
    return float(coef[0])


def fit_powerlaw_2d_constants(sizes: Sequence[int]) -> tuple[float, float]:
    """(A, B) en γ_s ≈ 2/√(A + B ln N) sobre redes abiertas cuadradas."""
    log_n, lhs = [], []
    for size in sizes:
        side = max(2, int(round(math.sqrt(size))))
        lattice = hypercube(2, side)
        s2 = off_diagonal_weight(PowerLaw(gamma=1.0), lattice)
        log_n.append(math.log(lattice.n_sites))
        lhs.append(4.0 * s2 / lattice.n_sites)
    slope, intercept = np.polyfit(log_n, lhs, 1)
    logger.info("Ajuste power-law 2D: A=%.6f B=%.6f", intercept, slope)
    return float(intercept), float(slope)
