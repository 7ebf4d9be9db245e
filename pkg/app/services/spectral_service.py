"""Análisis espectral de Γ.

- ``analyze``: diagonalización densa hermítica, trazas Tr Γ^k y veredicto PSD.
- ``closed_form_spectrum``: espectros exactos de matrices Toeplitz, circulantes
  y sumas de Kronecker del catálogo.
- ``gamma_p``: mayor acople con Γ semidefinida positiva.
- ``psd_certificate``: factorización de Cholesky de Γ + tol·N·I.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import bisect

from app.core.errors import InvalidInputError, NumericalError
from app.schemas.interaction import (
    SCALAR_KINDS,
    AllToAll,
    DecoherenceMatrix,
    Exponential,
    NearestNeighbor,
    NextNearestRing,
    with_gamma,
)
from app.schemas.lattice import LatticeSpec
from app.schemas.spectral import SpectralSummary
from app.services.decoherence_service import ModelError, build_decoherence

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
_GAMMA_P_XTOL = 1e-13


class SpectralError(NumericalError):
    """El eigensolver no convergió o las trazas no son consistentes."""


class UnphysicalMatrixError(InvalidInputError):
    """Γ no es semidefinida positiva donde se requiere."""


# ---------------------------------------------------------------------------
# Diagonalización numérica
# ---------------------------------------------------------------------------

def trace_powers(entries: np.ndarray) -> tuple[float, float, float]:
    """(Tr Γ, Tr Γ², Tr Γ³) desde las entradas.

    Tr Γ² = ||Γ||_F² y Tr Γ³ = Σ_ijk γ_ij γ_jk γ_ki.
    """
    tr1 = float(np.real(np.trace(entries)))
    tr2 = float(np.sum(np.abs(entries) ** 2))
    tr3 = float(np.real(np.einsum("ij,ji->", entries @ entries, entries)))
    return tr1, tr2, tr3


def _fix_vector_signs(vectors: np.ndarray) -> np.ndarray:
    """Primera componente no nula real y positiva en cada columna."""
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        col = fixed[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            lead = col[nz[0]]
            fixed[:, k] = col * (abs(lead) / lead)
    return fixed


def analyze(
    gamma: DecoherenceMatrix,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    with_vectors: bool = False,
) -> SpectralSummary:
    entries = gamma.entries
    n = gamma.n_sites
    if n < 1:
        raise SpectralError("Γ vacía")
    try:
        if with_vectors:
            values, vectors = scipy.linalg.eigh(entries)
        else:
            values = scipy.linalg.eigh(entries, eigvals_only=True)
            vectors = None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(f"eigh no convergió para N={n}: {exc}") from exc

    # orden descendente estable
    order = np.argsort(-values, kind="stable")
    values = values[order]
    if vectors is not None:
        vectors = _fix_vector_signs(vectors[:, order])

    tr1, tr2, tr3 = trace_powers(entries)
    scale = max(1.0, abs(tr2))
    if abs(float(np.sum(values**2)) - tr2) > 1e-9 * scale:
        raise SpectralError("Tr Γ² por autovalores no coincide con Frobenius")
    if abs(float(np.sum(values)) - tr1) > 1e-9 * max(1.0, abs(tr1)):
        raise SpectralError("Tr Γ por autovalores no coincide con la diagonal")

    min_value = float(values[-1])
    return SpectralSummary(
        eigenvalues=values,
        min_eigenvalue=min_value,
        trace_gamma=tr1,
        trace_gamma2=tr2,
        trace_gamma3=tr3,
        is_physical=min_value >= -tolerance * n,
        tolerance=tolerance,
        eigenvectors=vectors,
    )


def psd_certificate(gamma: DecoherenceMatrix, tol: float = DEFAULT_TOLERANCE) -> bool:
    n = gamma.n_sites
    shifted = gamma.entries + tol * n * np.eye(n)
    try:
        scipy.linalg.cholesky(shifted, lower=True)
    except np.linalg.LinAlgError:
        return False
    return True


# ---------------------------------------------------------------------------
# Espectros cerrados
# ---------------------------------------------------------------------------

def chain_nn_spectrum(n: int, gamma: float) -> np.ndarray:
    nu = np.arange(1, n + 1)
    return 1.0 + 2.0 * gamma * np.cos(nu * np.pi / (n + 1))


def exponential_ring_eigenvalues(n: int, gamma: float) -> np.ndarray:
    """Autovalores exactos de la circulante (1, γ, ..., γ^{(N-1)/2}, ..., γ)."""
    j = np.arange(n)
    if gamma < 1.0 and n % 2 == 1:
        num = 1.0 + gamma - 2.0 * gamma ** ((n + 1) / 2) * np.cos(j * np.pi) * np.cos(
            j * np.pi / n
        )
        den = 1.0 + gamma**2 - 2.0 * gamma * np.cos(2.0 * j * np.pi / n)
        return (1.0 - gamma) * num / den
    return circulant_eigenvalues(
        np.power(gamma, np.minimum(j, n - j).astype(float))
    )


def exponential_ring_eigenvalues_large_n(n: int, gamma: float) -> np.ndarray:
    """Aproximación (1-γ²)/(1+γ²-2γcos(2jπ/N)) para N grande."""
    j = np.arange(n)
    return (1.0 - gamma**2) / (1.0 + gamma**2 - 2.0 * gamma * np.cos(2 * j * np.pi / n))


def circulant_eigenvalues(first_column: np.ndarray) -> np.ndarray:
    """Espectro de una circulante real simétrica: Σ_k c_k cos(2πjk/N)."""
    n = first_column.shape[0]
    j = np.arange(n)
    k = np.arange(n)
    return np.cos(2.0 * np.pi * np.outer(j, k) / n) @ first_column


def nnn_ring_spectrum(n: int, g1: float, g2: float) -> np.ndarray:
    nu = np.arange(n)
    return (
        1.0
        + 2.0 * g1 * np.cos(2.0 * np.pi * nu / n)
        + 2.0 * g2 * np.cos(4.0 * np.pi * nu / n)
    )


def _kronecker_sum_nn(extents: tuple[int, ...], gamma: float) -> np.ndarray:
    # autovalores de la adyacencia del grafo grilla: Σ_α 2cos(j_α π/(n_α+1))
    total = np.zeros(1)
    for n in extents:
        axis = 2.0 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
        total = (total[:, None] + axis[None, :]).ravel()
    return 1.0 + gamma * total


def closed_form_spectrum(model, lattice: LatticeSpec) -> Optional[np.ndarray]:
    """Espectro exacto en orden descendente, o None si no hay forma cerrada."""
    n = lattice.n_sites
    values: Optional[np.ndarray] = None
    if isinstance(model, NearestNeighbor):
        if lattice.is_ring:
            values = 1.0 + 2.0 * model.gamma * np.cos(2.0 * np.pi * np.arange(n) / n)
        else:
            values = _kronecker_sum_nn(lattice.extents, model.gamma)
    elif isinstance(model, NextNearestRing) and lattice.is_ring:
        values = nnn_ring_spectrum(n, model.g1, model.g2)
    elif isinstance(model, Exponential) and lattice.is_ring:
        values = exponential_ring_eigenvalues(n, model.gamma)
    elif isinstance(model, AllToAll):
        values = np.concatenate(
            [[1.0 + model.gamma * (n - 1)], np.full(n - 1, 1.0 - model.gamma)]
        )
    if values is None:
        return None
    return np.sort(values)[::-1]


# ---------------------------------------------------------------------------
# Frontera física γ_p
# ---------------------------------------------------------------------------

def min_eigenvalue_family(model, lattice: LatticeSpec, gamma: float) -> float:
    candidate = with_gamma(model, gamma)
    closed = closed_form_spectrum(candidate, lattice)
    if closed is not None:
        return float(closed[-1])
    entries = build_decoherence(candidate, lattice).entries
    return float(scipy.linalg.eigh(entries, eigvals_only=True)[0])


def _nn_gamma_p_closed(lattice: LatticeSpec) -> float:
    if lattice.is_ring:
        n = lattice.n_sites
        # min_ν cos(2πν/N): -1 para N par, -cos(π/N) para N impar
        lowest = 1.0 if n % 2 == 0 else math.cos(math.pi / n)
        return 1.0 / (2.0 * lowest)
    denom = sum(
        2.0 * math.cos(math.pi / (n + 1)) for n in lattice.extents if n >= 2
    )
    return math.inf if denom == 0 else 1.0 / denom


def gamma_p(
    model,
    lattice: LatticeSpec,
    tol: float = DEFAULT_TOLERANCE,
    *,
    infinite: bool = False,
) -> float:
    """Mayor γ ∈ [0, 1] con Γ(γ) PSD (1 si Γ(1) ya es PSD)."""
    if model.kind not in SCALAR_KINDS:
        raise ModelError(f"gamma_p requiere un acople escalar, no {model.kind}")
    if isinstance(model, NearestNeighbor):
        if infinite:
            return 1.0 / (2.0 * lattice.dimension)
        return min(1.0, _nn_gamma_p_closed(lattice))
    if isinstance(model, AllToAll):
        return 1.0

    n = lattice.n_sites
    floor = -tol * n
    if min_eigenvalue_family(model, lattice, 1.0) >= floor:
        return 1.0
    # Γ(0) = I, así que el signo cambia en [0, 1]
    root = bisect(
        lambda g: min_eigenvalue_family(model, lattice, g) - floor,
        0.0,
        1.0,
        xtol=_GAMMA_P_XTOL,
    )
    logger.info("gamma_p por bisección: %s N=%d -> %.12f", model.kind, n, root)
    return float(root)
