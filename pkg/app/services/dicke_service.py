"""Modelo de Dicke con pérdida local en la base invariante por permutaciones.

Partiendo del estado totalmente excitado, ρ queda diagonal en |j, m> y basta
integrar las poblaciones p_{j,m} (probabilidad total del bloque degenerado).
Canal colectivo con tasa γ y canales locales con tasa 1 - γ.

Índices internos en enteros dobles: J2 = 2j, M2 = 2m.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from app.core.config import Settings
from app.core.errors import InvalidInputError
from app.schemas.dynamics import EmissionTrace
from app.services.dynamics_service import IntegrationError, default_time_grid

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class DickeSpace:
    n_sites: int
    j2: np.ndarray
    m2: np.ndarray
    index: dict

    @property
    def size(self) -> int:
        return int(self.j2.shape[0])


def dicke_space(n_sites: int) -> DickeSpace:
    j2_list, m2_list = [], []
    for j2 in range(n_sites, n_sites % 2 - 1, -2):
        for m2 in range(j2, -j2 - 1, -2):
            j2_list.append(j2)
            m2_list.append(m2)
    index = {(j2, m2): k for k, (j2, m2) in enumerate(zip(j2_list, m2_list))}
    return DickeSpace(
        n_sites=n_sites,
        j2=np.array(j2_list),
        m2=np.array(m2_list),
        index=index,
    )


def _transitions(space: DickeSpace, gamma: float):
    """(origen, destino, tasa) de todos los saltos que bajan m en 1."""
    half_n = space.n_sites / 2.0
    local = 1.0 - gamma
    for src, (j2, m2) in enumerate(zip(space.j2, space.m2)):
        j, m = j2 / 2.0, m2 / 2.0
        lowering = (j + m) * (j - m + 1.0)
        if lowering <= 0:
            continue
        same = gamma * lowering
        if j > 0:
            same += local * (half_n + 1.0) * lowering / (2.0 * j * (j + 1.0))
        yield src, space.index[(j2, m2 - 2)], same

        down = (half_n + j + 1.0) * (j + m) * (j + m - 1.0) / (2.0 * j * (2.0 * j + 1.0))
        if local > 0 and down > 0:
            yield src, space.index[(j2 - 2, m2 - 2)], local * down

    for src, (j2, m2) in enumerate(zip(space.j2, space.m2)):
        j, m = j2 / 2.0, m2 / 2.0
        up = (half_n - j) * (j - m + 1.0) * (j - m + 2.0) / (2.0 * (j + 1.0) * (2.0 * j + 1.0))
        if local > 0 and up > 0:
            yield src, space.index[(j2 + 2, m2 - 2)], local * up


def dicke_generator(n_sites: int, gamma: float) -> tuple[DickeSpace, sp.csr_matrix]:
    """Matriz de tasas Q con dp/dt = Q p (columnas suman cero)."""
    space = dicke_space(n_sites)
    src, dst, rate = [], [], []
    for s, d, r in _transitions(space, gamma):
        src.append(s)
        dst.append(d)
        rate.append(r)
    src_a, dst_a, rate_a = np.array(src), np.array(dst), np.array(rate)
    gain = sp.csr_matrix((rate_a, (dst_a, src_a)), shape=(space.size, space.size))
    loss = sp.diags(np.asarray(gain.sum(axis=0)).ravel())
    return space, (gain - loss).tocsr()


def dicke_rate_vector(space: DickeSpace, gamma: float) -> np.ndarray:
    """R por estado: γ(j+m)(j-m+1) + (1-γ)(N/2+m)."""
    j, m = space.j2 / 2.0, space.m2 / 2.0
    return gamma * (j + m) * (j - m + 1.0) + (1.0 - gamma) * (space.n_sites / 2.0 + m)


def dicke_local_evolve(
    n_sites: int, gamma: float, t_grid=None, *, settings: Optional[Settings] = None
) -> EmissionTrace:
    settings = settings or Settings()
    if not 2 <= n_sites <= settings.max_dicke_sites:
        raise InvalidInputError(
            f"N fuera de rango [2, {settings.max_dicke_sites}]: {n_sites}"
        )
    if not 0.0 <= gamma <= 1.0:
        raise InvalidInputError(f"γ fuera de [0, 1]: {gamma}")
    grid = np.asarray(default_time_grid(5.0) if t_grid is None else t_grid, dtype=float)

    space, generator = dicke_generator(n_sites, gamma)
    weights = dicke_rate_vector(space, gamma)
    p0 = np.zeros(space.size)
    p0[space.index[(n_sites, n_sites)]] = 1.0
    logger.info("Dicke+local: N=%d γ=%.6g, %d estados", n_sites, gamma, space.size)

    if grid.shape[0] == 1:
        populations = p0[:, None]
    else:
        sol = solve_ivp(
            lambda _t, p: generator @ p,
            (float(grid[0]), float(grid[-1])),
            p0,
            method="DOP853",
            t_eval=grid,
            rtol=settings.ode_rtol,
            atol=settings.ode_atol,
        )
        if not sol.success:
            raise IntegrationError(f"solve_ivp falló: {sol.message}")
        populations = sol.y

    rates = weights @ populations
    totals = populations.sum(axis=0)
    diagnostics = {
        "solver": "dicke",
        "n_sites": n_sites,
        "states": space.size,
        "max_trace_error": float(np.max(np.abs(totals - 1.0))),
        "min_population": float(populations.min()),
    }
    return EmissionTrace(
        times=grid, rates=np.asarray(rates), initial_rate=float(rates[0]), diagnostics=diagnostics
    )
