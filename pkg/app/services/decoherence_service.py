"""Construcción de la matriz de decoherencia Γ y del acople coherente J.

Todas las matrices se normalizan con γ_ii = 1 (Tr Γ = N). Las entradas se
construyen hermíticas por definición; no se simetrizan numéricamente.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from app.core.errors import InvalidInputError
from app.schemas.interaction import (
    AllToAll,
    ChiralInfiniteRange,
    DecoherenceMatrix,
    Exponential,
    NearestNeighbor,
    NearestNeighborNonuniform,
    NextNearestRing,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec
from app.services import lattice_service

logger = logging.getLogger(__name__)


class ModelError(InvalidInputError):
    """Modelo incompatible con la red o parámetros fuera de rango."""


# ---------------------------------------------------------------------------
# Descriptores de procedencia
# ---------------------------------------------------------------------------

def model_tag(model) -> str:
    if isinstance(model, NearestNeighborNonuniform):
        return "nn_nonuniform:gammas=" + "/".join(repr(g) for g in model.gammas)
    fields = model.model_dump(exclude={"kind"})
    body = ",".join(f"{k}={v!r}" for k, v in fields.items())
    return f"{model.kind}:{body}"


# ---------------------------------------------------------------------------
# Compatibilidad modelo / red
# ---------------------------------------------------------------------------

def _check_compatible(model, lattice: LatticeSpec) -> None:
    n = lattice.n_sites
    if isinstance(model, NearestNeighborNonuniform):
        if lattice.dimension != 1 or lattice.is_ring:
            raise ModelError("nn_nonuniform requiere cadena abierta 1D")
        if len(model.gammas) != n - 1:
            raise ModelError(
                f"nn_nonuniform requiere {n - 1} acoples, se recibieron "
                f"{len(model.gammas)}"
            )
    elif isinstance(model, NextNearestRing):
        if not lattice.is_ring or n % 2 == 0 or n < 5:
            raise ModelError("nnn requiere anillo 1D con N impar >= 5")
    elif isinstance(model, ChiralInfiniteRange):
        if lattice.dimension != 1:
            raise ModelError("chiral requiere un arreglo 1D")


def build_decoherence(model, lattice: LatticeSpec) -> DecoherenceMatrix:
    _check_compatible(model, lattice)
    n = lattice.n_sites
    tag = model_tag(model)

    if isinstance(model, NearestNeighbor):
        entries = np.eye(n) + model.gamma * (
            lattice_service.graph_distance_matrix(lattice) == 1
        )
    elif isinstance(model, NearestNeighborNonuniform):
        entries = np.eye(n)
        idx = np.arange(n - 1)
        entries[idx, idx + 1] = model.gammas
        entries[idx + 1, idx] = model.gammas
    elif isinstance(model, NextNearestRing):
        hops = lattice_service.graph_distance_matrix(lattice)
        entries = np.eye(n) + model.g1 * (hops == 1) + model.g2 * (hops == 2)
    elif isinstance(model, Exponential):
        sep = lattice_service.separation_matrix(lattice)
        with np.errstate(divide="ignore"):
            entries = np.power(model.gamma, sep)
        np.fill_diagonal(entries, 1.0)
    elif isinstance(model, PowerLaw):
        sep = lattice_service.separation_matrix(lattice)
        off = ~np.eye(n, dtype=bool)
        entries = np.eye(n)
        entries[off] = model.gamma / sep[off]
    elif isinstance(model, ChiralInfiniteRange):
        j = np.arange(n)
        # fase kd·(l - j): Γ[0,1] = -iχ sin(kd)
        phase = model.kd * (j[None, :] - j[:, None])
        entries = np.cos(phase) - 1j * model.chi * np.sin(phase)
        if model.chi == 0:
            entries = entries.real.copy()
        np.fill_diagonal(entries, 1.0)
    elif isinstance(model, AllToAll):
        entries = np.full((n, n), model.gamma)
        np.fill_diagonal(entries, 1.0)
    else:  # pragma: no cover - la unión discriminada es cerrada
        raise ModelError(f"Modelo desconocido: {model!r}")

    logger.debug("Γ construida: %s sobre N=%d", tag, n)
    return DecoherenceMatrix(entries=np.asarray(entries), model_tag=tag)


def from_entries(entries, tag: str = "custom") -> DecoherenceMatrix:
    """Envuelve una matriz externa, validando hermiticidad y diagonal."""
    arr = np.asarray(entries)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ModelError("Γ debe ser cuadrada")
    if not np.allclose(arr, arr.conj().T, atol=1e-12):
        raise ModelError("Γ debe ser hermítica")
    if not np.allclose(np.diag(arr), 1.0, atol=1e-12):
        raise ModelError("Γ debe tener diagonal unitaria")
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real.copy()
    return DecoherenceMatrix(entries=arr, model_tag=tag)


def phase_twist(gamma: DecoherenceMatrix, phi: float) -> DecoherenceMatrix:
    """γ_ij -> γ_ij·e^{iφ(i-j)} (transformación de gauge; conserva el espectro)."""
    idx = np.arange(gamma.n_sites)
    twist = np.exp(1j * phi * (idx[:, None] - idx[None, :]))
    return DecoherenceMatrix(
        entries=gamma.entries * twist, model_tag=f"{gamma.model_tag}|twist={phi!r}"
    )


# ---------------------------------------------------------------------------
# Acople coherente J
# ---------------------------------------------------------------------------

def build_coherent_coupling(
    kind: str,
    n_sites: int,
    *,
    strength: float = 0.0,
    matrix=None,
) -> Optional[np.ndarray]:
    """J_ij del Hamiltoniano H = Σ J_ij σ_i⁺σ_j⁻.

    ``none`` devuelve None (sin contribución).
    """
    if kind == "none":
        return None
    if kind == "all_to_all":
        coupling = np.full((n_sites, n_sites), float(strength))
        np.fill_diagonal(coupling, 0.0)
        return coupling
    if kind == "custom":
        if matrix is None:
            raise ModelError("custom requiere una matriz")
        arr = np.asarray(matrix)
        if arr.shape != (n_sites, n_sites):
            raise ModelError(f"J debe ser {n_sites}x{n_sites}")
        if not np.allclose(arr, arr.conj().T, atol=1e-12):
            raise ModelError("J debe ser hermítica")
        return arr
    raise ModelError(f"Tipo de acople coherente desconocido: {kind!r}")
