"""Geometría de arreglos ordenados: coordenadas, separaciones y vecinos.

Convenciones:
  - índice -> coordenada en orden row-major (``np.unravel_index``).
  - borde abierto: separación euclídea d·|x_i - x_j|, distancia de grafo
    Manhattan.
  - anillo: separación y distancia de grafo por saltos, min(|i-j|, N-|i-j|).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from app.core.errors import InvalidInputError
from app.schemas.lattice import LatticeSpec, SitePair

logger = logging.getLogger(__name__)


class LatticeError(InvalidInputError):
    """Índices fuera de rango u operaciones no soportadas por la geometría."""


# ---------------------------------------------------------------------------
# Indexado
# ---------------------------------------------------------------------------

def _check_index(spec: LatticeSpec, index: int) -> None:
    if not 0 <= index < spec.n_sites:
        raise LatticeError(f"Índice {index} fuera de rango [0, {spec.n_sites})")


def site_coordinates(spec: LatticeSpec, index: int) -> tuple[int, ...]:
    _check_index(spec, index)
    return tuple(int(c) for c in np.unravel_index(index, spec.extents))


def site_index(spec: LatticeSpec, coords: Sequence[int]) -> int:
    if len(coords) != spec.dimension:
        raise LatticeError("La coordenada no coincide con la dimensión")
    if any(not 0 <= c < n for c, n in zip(coords, spec.extents)):
        raise LatticeError(f"Coordenada {tuple(coords)} fuera de la red")
    return int(np.ravel_multi_index(tuple(coords), spec.extents))


def coordinates(spec: LatticeSpec) -> np.ndarray:
    """Matriz N×D de coordenadas enteras."""
    grids = np.unravel_index(np.arange(spec.n_sites), spec.extents)
    return np.stack(grids, axis=1)


# ---------------------------------------------------------------------------
# Distancias
# ---------------------------------------------------------------------------

def _ring_hops(n: int, i: int, j: int) -> int:
    k = abs(i - j)
    return min(k, n - k)


def pair_separation(spec: LatticeSpec, i: int, j: int) -> float:
    _check_index(spec, i)
    _check_index(spec, j)
    if spec.is_ring:
        return spec.spacing * _ring_hops(spec.n_sites, i, j)
    a = np.asarray(site_coordinates(spec, i), dtype=float)
    b = np.asarray(site_coordinates(spec, j), dtype=float)
    return float(spec.spacing * np.linalg.norm(a - b))


def graph_distance(spec: LatticeSpec, i: int, j: int) -> int:
    _check_index(spec, i)
    _check_index(spec, j)
    if spec.is_ring:
        return _ring_hops(spec.n_sites, i, j)
    a = site_coordinates(spec, i)
    b = site_coordinates(spec, j)
    return int(sum(abs(x - y) for x, y in zip(a, b)))


def separation_matrix(spec: LatticeSpec) -> np.ndarray:
    """Separaciones en unidades de d (N×N)."""
    if spec.is_ring:
        idx = np.arange(spec.n_sites)
        k = np.abs(idx[:, None] - idx[None, :])
        return np.minimum(k, spec.n_sites - k).astype(float)
    xyz = coordinates(spec).astype(float)
    return cdist(xyz, xyz)


def graph_distance_matrix(spec: LatticeSpec) -> np.ndarray:
    if spec.is_ring:
        return separation_matrix(spec).astype(int)
    xyz = coordinates(spec)
    return cdist(xyz, xyz, metric="cityblock").astype(int)


# ---------------------------------------------------------------------------
# Vecinos
# ---------------------------------------------------------------------------

def neighbor_pairs(spec: LatticeSpec, order: int = 1) -> list[SitePair]:
    """Pares (i < j) a distancia de grafo ``order``.

    ``order=2`` sólo para anillos (NNN).
    """
    if order not in (1, 2):
        raise LatticeError(f"Orden de vecinos no soportado: {order}")
    if order == 2 and not spec.is_ring:
        raise LatticeError("Vecinos de orden 2 sólo en anillos 1D")

    dist = graph_distance_matrix(spec)
    ii, jj = np.nonzero(np.triu(dist == order, k=1))
    return [
        SitePair(
            i=int(i),
            j=int(j),
            separation=float(spec.spacing * order) if spec.is_ring
            else pair_separation(spec, int(i), int(j)),
            graph_distance=order,
        )
        for i, j in zip(ii, jj)
    ]


def expected_nn_pair_count(spec: LatticeSpec) -> int:
    """Σ_j (n_j - 1)·N/n_j en bordes abiertos; N en anillos."""
    if spec.is_ring:
        return spec.n_sites
    n = spec.n_sites
    return sum((nj - 1) * (n // nj) for nj in spec.extents)


# ---------------------------------------------------------------------------
# Clases de desplazamiento (sumas O(N) de trazas)
# ---------------------------------------------------------------------------

@dataclass(slots=True, frozen=True)
class DisplacementClasses:
    """Desplazamientos |Δ| con multiplicidad de pares ordenados.

    ``separations`` en unidades de d; ``hops`` distancia de grafo;
    ``weights`` cuenta los pares (i, j) ordenados con ese desplazamiento.
    Σ weights = N².
    """

    separations: np.ndarray
    hops: np.ndarray
    weights: np.ndarray


def displacement_classes(spec: LatticeSpec) -> DisplacementClasses:
    n = spec.n_sites
    if spec.is_ring:
        k = np.arange(n)
        hops = np.minimum(k, n - k)
        return DisplacementClasses(
            separations=hops.astype(float),
            hops=hops,
            weights=np.full(n, float(n)),
        )

    # octante positivo: peso ∏(n_j - Δ_j)·2^{#Δ_j != 0}
    axes = [np.arange(nj) for nj in spec.extents]
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)
    extents = np.asarray(spec.extents)
    weights = np.prod(extents[None, :] - offsets, axis=1).astype(float)
    weights *= 2.0 ** np.count_nonzero(offsets, axis=1)
    logger.debug("Clases de desplazamiento: %d para N=%d", len(offsets), n)
    return DisplacementClasses(
        separations=np.sqrt(np.sum(offsets.astype(float) ** 2, axis=1)),
        hops=np.sum(offsets, axis=1),
        weights=weights,
    )

