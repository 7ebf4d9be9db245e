"""Sectores de excitación fija para N <= max_exact_sites.

Los estados base de un sector k son enteros con k bits encendidos (bit j =
sitio j excitado), ordenados de forma creciente. H_Γ y H_J conservan k; σ_j⁻
lleva el sector k al k - 1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.linalg
import scipy.sparse as sp

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def sector_states(n_sites: int, excitations: int) -> np.ndarray:
    if not 0 <= excitations <= n_sites:
        return np.zeros(0, dtype=np.int64)
    states = [
        sum(1 << j for j in combo)
        for combo in combinations(range(n_sites), excitations)
    ]
    return np.array(sorted(states), dtype=np.int64)


def sector_dimension(n_sites: int, excitations: int) -> int:
    return int(sector_states(n_sites, excitations).shape[0])


def _locate(states: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return np.searchsorted(states, targets)


# ---------------------------------------------------------------------------
# Operadores de bajada
# ---------------------------------------------------------------------------

def lowering_operator(n_sites: int, excitations: int, site: int) -> sp.csr_matrix:
    """σ_site⁻ : sector k -> k - 1, matriz dispersa (d_{k-1} × d_k)."""
    source = sector_states(n_sites, excitations)
    target = sector_states(n_sites, excitations - 1)
    mask = ((source >> site) & 1) == 1
    cols = np.flatnonzero(mask)
    rows = _locate(target, source[mask] ^ (1 << site))
    data = np.ones(cols.shape[0])
    return sp.csr_matrix((data, (rows, cols)), shape=(target.shape[0], source.shape[0]))


@dataclass(slots=True, frozen=True)
class StackedLowering:
    """σ_j⁻ de un sector apilados por sitio.

    ``vertical`` = vstack_j σ_j⁻ (N·d_{k-1} × d_k);
    ``horizontal`` = hstack_j σ_j⁻ (d_{k-1} × N·d_k).
    """

    vertical: sp.csr_matrix
    horizontal: sp.csr_matrix


def stacked_lowering(n_sites: int, excitations: int) -> StackedLowering:
    ops = [lowering_operator(n_sites, excitations, j) for j in range(n_sites)]
    return StackedLowering(
        vertical=sp.vstack(ops, format="csr"),
        horizontal=sp.hstack(ops, format="csr"),
    )


# ---------------------------------------------------------------------------
# Hamiltonianos de hopping Σ A_ij σ_i⁺σ_j⁻
# ---------------------------------------------------------------------------

def hopping_sector_matrix(
    coefficients: np.ndarray, excitations: int
) -> sp.csr_matrix:
    """Bloque del sector k de H_A = Σ_ij A_ij σ_i⁺σ_j⁻.

    Elemento <b'|H_A|b> = A_ij con b' = b - 2^j + 2^i.
    """
    n = coefficients.shape[0]
    states = sector_states(n, excitations)
    dim = states.shape[0]
    dtype = np.complex128 if np.iscomplexobj(coefficients) else np.float64

    occupation = ((states[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    data = [occupation @ np.real(np.diag(coefficients)).astype(dtype)]

    ii, jj = np.nonzero(coefficients)
    for i, j in zip(ii, jj):
        if i == j:
            continue
        mask = (((states >> j) & 1) == 1) & (((states >> i) & 1) == 0)
        if not mask.any():
            continue
        src = np.flatnonzero(mask)
        dst = _locate(states, states[mask] ^ (1 << j) ^ (1 << i))
        rows.append(dst)
        cols.append(src)
        data.append(np.full(src.shape[0], coefficients[i, j], dtype=dtype))

    return sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )


def hgamma_sector(gamma_entries: np.ndarray, excitations: int) -> sp.csr_matrix:
    return hopping_sector_matrix(gamma_entries, excitations)


def sector_max_eigenvalue(gamma_entries: np.ndarray, excitations: int) -> float:
    block = hgamma_sector(gamma_entries, excitations).toarray()
    if block.shape[0] == 0:
        return float("-inf")
    # orden ascendente
    return float(scipy.linalg.eigh(block, eigvals_only=True)[-1])
