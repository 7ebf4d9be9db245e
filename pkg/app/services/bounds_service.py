"""Cotas superiores de la tasa de emisión vía λ_max(H_Γ).

R(t) = <H_Γ> para todo t, de modo que cualquier cota de λ_max acota el pico
de la tasa. ``certifies_no_burst`` indica cota <= N.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from app.core.config import Settings
from app.core.errors import InvalidInputError
from app.schemas.bounds import RateBound
from app.schemas.interaction import (
    DecoherenceMatrix,
    Exponential,
    NearestNeighbor,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec
from app.services import sector_service
from app.services.decoherence_service import model_tag

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329


class BoundError(InvalidInputError):
    """Parámetros fuera del dominio de la cota (N par, N demasiado grande)."""


def _certifies(value: float, n: int) -> bool:
    return value <= n * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# Cotas analíticas
# ---------------------------------------------------------------------------

def gershgorin_nn_bound(
    dimension: int, n_sites: int, gamma: float, tag: Optional[str] = None
) -> RateBound:
    """max_m (N - m + 2Dmγ) sobre m ∈ [0, N]."""
    if not 0.0 <= gamma <= 1.0:
        raise BoundError(f"γ fuera de [0, 1]: {gamma}")
    slope = 2.0 * dimension * gamma - 1.0
    value = float(n_sites) if slope <= 0 else n_sites * (1.0 + slope)
    return RateBound(
        model_tag=tag or f"nn:gamma={gamma!r}",
        n_sites=n_sites,
        bound_value=value,
        method="gershgorin_nn",
        certifies_no_burst=gamma <= 1.0 / (2.0 * dimension),
    )


def _check_odd(n_sites: int) -> None:
    if n_sites < 3 or n_sites % 2 == 0:
        raise BoundError(f"La cota 1D requiere anillo con N impar >= 3, N={n_sites}")


def _integer_max(n_sites: int, coupling_sum: float) -> float:
    """max sobre m' ∈ {0..(N-1)/2} de N - m' + 2m'·Σ."""
    half = (n_sites - 1) // 2
    return n_sites + half * max(0.0, 2.0 * coupling_sum - 1.0)


def exponential_1d_bound(
    n_sites: int, gamma: float, tag: Optional[str] = None
) -> RateBound:
    _check_odd(n_sites)
    if not 0.0 <= gamma <= 1.0:
        raise BoundError(f"γ fuera de [0, 1]: {gamma}")
    half = (n_sites - 1) // 2
    if gamma <= 1.0 / 3.0:
        value = float(n_sites)
    elif gamma < 1.0:
        value = n_sites + half * (3.0 * gamma - 1.0) / (1.0 - gamma)
    else:
        value = n_sites + (n_sites - 2) * (n_sites - 1) / 2.0

    exact = _integer_max(n_sites, sum(gamma**k for k in range(1, half + 1)))
    return RateBound(
        model_tag=tag or f"exp:gamma={gamma!r}",
        n_sites=n_sites,
        bound_value=value,
        method="exponential_1d",
        certifies_no_burst=_certifies(value, n_sites),
        exact_sum_value=exact,
    )


def powerlaw_1d_bound(
    n_sites: int, gamma: float, tag: Optional[str] = None
) -> RateBound:
    _check_odd(n_sites)
    half = (n_sites - 1) // 2
    relaxed = n_sites + half * (2.0 * gamma * (math.log(n_sites) + EULER_GAMMA) - 1.0)
    value = max(float(n_sites), relaxed)
    harmonic = sum(1.0 / k for k in range(1, half + 1))
    return RateBound(
        model_tag=tag or f"power:gamma={gamma!r}",
        n_sites=n_sites,
        bound_value=value,
        method="powerlaw_1d",
        certifies_no_burst=_certifies(value, n_sites),
        exact_sum_value=_integer_max(n_sites, gamma * harmonic),
    )


# ---------------------------------------------------------------------------
# Oráculo por diagonalización de sectores
# ---------------------------------------------------------------------------

def brute_force_hgamma_max(
    gamma: DecoherenceMatrix, threads: int = 1, settings: Optional[Settings] = None
) -> float:
    """λ_max(H_Γ) exacto: máximo sobre los sectores de excitación k = 0..N."""
    n = gamma.n_sites
    limit = (settings or Settings()).max_exact_sites
    if n > limit:
        raise BoundError(f"Fuerza bruta limitada a N <= {limit}, N={n}")

    entries = gamma.entries
    sectors = range(n + 1)
    if threads <= 1:
        values = [sector_service.sector_max_eigenvalue(entries, k) for k in sectors]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(
                pool.map(lambda k: sector_service.sector_max_eigenvalue(entries, k), sectors)
            )
    best = max(values)
    logger.debug("λ_max(H_Γ) N=%d -> %.12f (sectores=%d)", n, best, n + 1)
    return best


def brute_force_bound(
    gamma: DecoherenceMatrix, threads: int = 1, settings: Optional[Settings] = None
) -> RateBound:
    n = gamma.n_sites
    value = max(brute_force_hgamma_max(gamma, threads, settings), float(n))
    return RateBound(
        model_tag=gamma.model_tag,
        n_sites=n,
        bound_value=value,
        method="brute_force",
        certifies_no_burst=_certifies(value, n),
    )


# ---------------------------------------------------------------------------
# Selección por modelo
# ---------------------------------------------------------------------------

def analytic_bounds(model, lattice: LatticeSpec) -> list[RateBound]:
    """Cotas analíticas aplicables al par modelo/red (puede ser vacía)."""
    n = lattice.n_sites
    tag = model_tag(model)
    odd_ring = lattice.is_ring and n % 2 == 1
    bounds: list[RateBound] = []
    if isinstance(model, NearestNeighbor):
        bounds.append(gershgorin_nn_bound(lattice.dimension, n, model.gamma, tag))
    elif isinstance(model, Exponential) and odd_ring:
        bounds.append(exponential_1d_bound(n, model.gamma, tag))
    elif isinstance(model, PowerLaw) and odd_ring:
        bounds.append(powerlaw_1d_bound(n, model.gamma, tag))
    if not bounds:
        logger.warning("Sin cota analítica para %s sobre N=%d", tag, n)
    return bounds
