"""Dinámica exacta de la ecuación maestra para N <= max_exact_sites.

El operador densidad se guarda por bloques de sector de excitación ρ_{k,k}.
H_Γ, H_J y el disipador conservan la diferencia de excitaciones entre bra y
ket, y R(t) sólo depende de los bloques diagonales, así que esos bloques
forman un sistema cerrado y son los únicos que se integran.

    dρ_k = A_k ρ_k + ρ_k A_k† + Σ_ij γ_ij σ_j⁻ ρ_{k+1} σ_i⁺
    A_k  = -i H_J - ½ H_Γ   (restringidos al sector k)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import DOP853

from app.core.config import Settings
from app.core.errors import InvalidInputError, NumericalError
from app.schemas.dynamics import (
    FULLY_EXCITED,
    BurstReport,
    EmissionTrace,
    InitialState,
)
from app.schemas.interaction import DecoherenceMatrix
from app.schemas.spectral import SpectralSummary
from app.services import sector_service, spectral_service
from app.services.spectral_service import UnphysicalMatrixError

logger = logging.getLogger(__name__)

# primer intervalo máximo para distinguir un burst retardado
MAX_FIRST_INTERVAL = 1e-3


class IntegrationError(NumericalError):
    """El integrador adaptativo no alcanzó la tolerancia pedida."""


class GridResolutionError(NumericalError):
    """La grilla temporal es demasiado gruesa cerca de t = 0."""


# ---------------------------------------------------------------------------
# Grillas temporales
# ---------------------------------------------------------------------------

def default_time_grid(t_max: float, points: int = 400, early_points: int = 60) -> np.ndarray:
    """0, luego geométrica 1e-4..1e-1 y lineal hasta t_max."""
    if t_max <= 0:
        raise InvalidInputError(f"t_max debe ser positivo: {t_max}")
    if points < 2:
        raise InvalidInputError("Se requieren al menos 2 puntos")
    early = np.geomspace(1e-4, 1e-1, early_points)
    early = early[early < t_max]
    late = np.linspace(min(0.1, t_max), t_max, points)
    grid = np.concatenate([[0.0], early, late])
    return np.unique(grid)


def _check_grid(t_grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < 1 or grid[0] != 0.0:
        raise InvalidInputError("La grilla temporal debe comenzar en 0")
    if np.any(np.diff(grid) <= 0):
        raise InvalidInputError("La grilla temporal debe ser estrictamente creciente")
    return grid


# ---------------------------------------------------------------------------
# Operadores de salto
# ---------------------------------------------------------------------------

@dataclass(slots=True, frozen=True)
class JumpOperator:
    """ĉ_ν = Σ_j v_j σ_j⁻ con tasa Γ_ν."""

    rate: float
    vector: np.ndarray


def jump_operators(
    summary: SpectralSummary, gamma: Optional[DecoherenceMatrix] = None
) -> list[JumpOperator]:
    if summary.eigenvectors is None:
        raise InvalidInputError("jump_operators requiere autovectores (with_vectors=True)")
    if not summary.is_physical:
        raise UnphysicalMatrixError(
            f"Γ no es PSD (λ_min = {summary.min_eigenvalue:.3e})"
        )
    rates = summary.eigenvalues
    if np.any(rates < 0):
        logger.warning("Autovalores negativos recortados a 0: min=%.3e", rates.min())
        rates = np.clip(rates, 0.0, None)

    vectors = summary.eigenvectors
    n = summary.n_sites
    if not np.allclose(vectors.conj().T @ vectors, np.eye(n), atol=1e-9):
        raise spectral_service.SpectralError("Autovectores no ortonormales")
    if gamma is not None:
        rebuilt = (vectors * rates) @ vectors.conj().T
        if np.max(np.abs(rebuilt - gamma.entries)) > 1e-9:
            raise spectral_service.SpectralError("La reconstrucción Σ Γ_ν v v† no reproduce Γ")
    return [JumpOperator(rate=float(r), vector=vectors[:, k]) for k, r in enumerate(rates)]


# ---------------------------------------------------------------------------
# Generador por bloques
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class _SectorBlocks:
    n_sites: int
    dims: list[int]
    slices: list[slice]
    hgamma: list[sp.csr_matrix]
    drift: list[sp.csr_matrix]
    lowering: list[Optional[sector_service.StackedLowering]]
    gamma_entries: np.ndarray
    dtype: type

    @property
    def size(self) -> int:
        return self.slices[-1].stop


def _build_blocks(gamma: DecoherenceMatrix, coupling: Optional[np.ndarray]) -> _SectorBlocks:
    n = gamma.n_sites
    complex_state = (not gamma.is_real) or coupling is not None
    dtype = np.complex128 if complex_state else np.float64

    dims, slices, hgamma, drift, lowering = [], [], [], [], []
    offset = 0
    for k in range(n + 1):
        d = sector_service.sector_dimension(n, k)
        dims.append(d)
        slices.append(slice(offset, offset + d * d))
        offset += d * d
        h = sector_service.hgamma_sector(gamma.entries, k)
        hgamma.append(h)
        a = -0.5 * h
        if coupling is not None:
            a = a - 1j * sector_service.hopping_sector_matrix(coupling, k)
        drift.append(sp.csr_matrix(a, dtype=dtype))
        # σ⁻ del sector k+1 alimenta al bloque k
        lowering.append(sector_service.stacked_lowering(n, k + 1) if k < n else None)
    return _SectorBlocks(
        n_sites=n,
        dims=dims,
        slices=slices,
        hgamma=hgamma,
        drift=drift,
        lowering=lowering,
        gamma_entries=gamma.entries,
        dtype=dtype,
    )


def _block(blocks: _SectorBlocks, y: np.ndarray, k: int) -> np.ndarray:
    d = blocks.dims[k]
    return y[blocks.slices[k]].reshape(d, d)


def _make_rhs(blocks: _SectorBlocks) -> Callable[[float, np.ndarray], np.ndarray]:
    n = blocks.n_sites

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        out = np.empty_like(y)
        for k in range(n + 1):
            rho = _block(blocks, y, k)
            x = blocks.drift[k] @ rho
            # ρ hermítica: ρA† = (Aρ)†
            drho = x + x.conj().T
            stacked = blocks.lowering[k]
            if stacked is not None:
                upper = _block(blocks, y, k + 1)
                d_lo, d_up = blocks.dims[k], blocks.dims[k + 1]
                m = (stacked.vertical @ upper).reshape(n, d_lo, d_up)
                w = np.tensordot(blocks.gamma_entries, m, axes=(1, 0))
                w_h = w.conj().transpose(0, 2, 1).reshape(n * d_up, d_lo)
                drho = drho + (stacked.horizontal @ w_h).conj().T
            out[blocks.slices[k]] = drho.ravel()
        return out

    return rhs


def _initial_vector(blocks: _SectorBlocks, state: InitialState) -> np.ndarray:
    n = blocks.n_sites
    y0 = np.zeros(blocks.size, dtype=blocks.dtype)
    p = state.excited_population
    for k in range(n + 1):
        # amplitudes iguales dentro del sector; la fase φ se cancela en ρ_kk
        weight = p**k * (1.0 - p) ** (n - k)
        if weight == 0.0:
            continue
        d = blocks.dims[k]
        y0[blocks.slices[k]] = np.full(d * d, weight)
    return y0


def _rate(blocks: _SectorBlocks, y: np.ndarray) -> float:
    total = 0.0
    for k in range(blocks.n_sites + 1):
        rho = _block(blocks, y, k)
        # Tr(H ρ) = Σ_xy H_xy ρ_yx
        total += float(np.real(blocks.hgamma[k].multiply(rho.T).sum()))
    return total


def _populations(blocks: _SectorBlocks, y: np.ndarray) -> tuple[float, float, float]:
    trace, low, high = 0.0, math.inf, -math.inf
    for k in range(blocks.n_sites + 1):
        diag = np.real(np.diagonal(_block(blocks, y, k)))
        trace += float(diag.sum())
        low = min(low, float(diag.min()))
        high = max(high, float(diag.max()))
    return trace, low, high


def _prepare(
    gamma: DecoherenceMatrix, coupling: Optional[np.ndarray], settings: Settings
) -> _SectorBlocks:
    limit = settings.max_exact_sites
    if gamma.n_sites > limit:
        raise InvalidInputError(
            f"Evolución exacta limitada a N <= {limit}, N={gamma.n_sites}"
        )
    summary = spectral_service.analyze(gamma, settings.psd_tolerance)
    if not summary.is_physical:
        raise UnphysicalMatrixError(
            f"Γ no es PSD (λ_min = {summary.min_eigenvalue:.3e}); la ecuación "
            "maestra no es físicamente válida"
        )
    if coupling is not None and coupling.shape != gamma.entries.shape:
        raise InvalidInputError("J y Γ deben tener la misma dimensión")
    return _build_blocks(gamma, coupling)


# ---------------------------------------------------------------------------
# Evolución
# ---------------------------------------------------------------------------

def lindblad_evolve(
    gamma: DecoherenceMatrix,
    coupling: Optional[np.ndarray] = None,
    initial_state: InitialState = FULLY_EXCITED,
    t_grid=None,
    *,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> EmissionTrace:
    settings = settings or Settings()
    rtol = settings.ode_rtol if rtol is None else rtol
    atol = settings.ode_atol if atol is None else atol
    grid = _check_grid(default_time_grid(5.0) if t_grid is None else t_grid)

    blocks = _prepare(gamma, coupling, settings)
    rhs = _make_rhs(blocks)
    y0 = _initial_vector(blocks, initial_state)
    logger.info(
        "Evolución exacta: N=%d, estado=%s, %d puntos hasta t=%.3g (dim=%d)",
        blocks.n_sites,
        initial_state.kind,
        grid.shape[0],
        grid[-1],
        blocks.size,
    )

    rates = np.empty(grid.shape[0])
    rates[0] = _rate(blocks, y0)
    trace_error, pop_low, pop_high = 0.0, math.inf, -math.inf

    def record(y: np.ndarray) -> None:
        nonlocal trace_error, pop_low, pop_high
        trace, low, high = _populations(blocks, y)
        trace_error = max(trace_error, abs(trace - 1.0))
        pop_low, pop_high = min(pop_low, low), max(pop_high, high)

    record(y0)
    if grid.shape[0] > 1:
        solver = DOP853(rhs, 0.0, y0, grid[-1], rtol=rtol, atol=atol)
        k = 1
        while k < grid.shape[0]:
            message = solver.step()
            if solver.status == "failed":
                raise IntegrationError(f"DOP853 falló en t={solver.t:.6g}: {message}")
            if grid[k] <= solver.t:
                dense = solver.dense_output()
                while k < grid.shape[0] and grid[k] <= solver.t:
                    y = dense(grid[k])
                    rates[k] = _rate(blocks, y)
                    record(y)
                    k += 1
            if solver.status == "finished" and k < grid.shape[0]:
                y = solver.y
                while k < grid.shape[0]:
                    rates[k] = _rate(blocks, y)
                    record(y)
                    k += 1

    if trace_error > 1e-8:
        logger.warning("Traza de ρ desviada %.3e (rtol=%.1e)", trace_error, rtol)
    diagnostics = {
        "solver": "exact",
        "n_sites": blocks.n_sites,
        "max_trace_error": trace_error,
        "min_population": pop_low,
        "max_population": pop_high,
    }
    return EmissionTrace(
        times=grid, rates=rates, initial_rate=float(rates[0]), diagnostics=diagnostics
    )


def exact_rdot0(
    gamma: DecoherenceMatrix,
    coupling: Optional[np.ndarray] = None,
    initial_state: InitialState = FULLY_EXCITED,
    *,
    settings: Optional[Settings] = None,
) -> float:
    """Ṙ(0) = Tr(H_Γ ρ̇(0)) desde el generador, sin integrar."""
    blocks = _prepare(gamma, coupling, settings or Settings())
    y0 = _initial_vector(blocks, initial_state)
    return _rate(blocks, _make_rhs(blocks)(0.0, y0))


# ---------------------------------------------------------------------------
# Detección de bursts
# ---------------------------------------------------------------------------

def finite_difference_rdot0(trace: EmissionTrace) -> float:
    """Derivada en t=0 con tres puntos no equiespaciados (orden 2)."""
    if trace.times.shape[0] < 3:
        raise InvalidInputError("Se requieren al menos 3 puntos")
    t1, t2 = float(trace.times[1]), float(trace.times[2])
    f0, f1, f2 = (float(x) for x in trace.rates[:3])
    return (
        -f0 * (t1 + t2) / (t1 * t2)
        + f1 * t2 / (t1 * (t2 - t1))
        - f2 * t1 / (t2 * (t2 - t1))
    )


def _refine_peak(times: np.ndarray, rates: np.ndarray, idx: int) -> tuple[float, float]:
    if idx == 0 or idx == times.shape[0] - 1:
        return float(times[idx]), float(rates[idx])
    window = slice(idx - 1, idx + 2)
    a, b, c = np.polyfit(times[window], rates[window], 2)
    if a >= 0:
        return float(times[idx]), float(rates[idx])
    t_peak = -b / (2.0 * a)
    if not times[idx - 1] <= t_peak <= times[idx + 1]:
        return float(times[idx]), float(rates[idx])
    return float(t_peak), float(max(rates[idx], np.polyval([a, b, c], t_peak)))


def detect_burst(trace: EmissionTrace, threshold: Optional[float] = None) -> BurstReport:
    threshold = Settings().burst_threshold if threshold is None else threshold
    times, rates = trace.times, trace.rates
    if times.shape[0] < 3:
        raise InvalidInputError("detect_burst requiere al menos 3 puntos")
    if times[1] - times[0] > MAX_FIRST_INTERVAL:
        raise GridResolutionError(
            f"Primer intervalo {times[1] - times[0]:.3g} > {MAX_FIRST_INTERVAL}; "
            "no se puede evaluar el burst retardado"
        )

    idx = int(np.argmax(rates))
    peak_time, peak_rate = _refine_peak(times, rates, idx)
    initial = trace.initial_rate
    fractional = peak_rate / initial - 1.0 if initial > 0 else 0.0
    slope = finite_difference_rdot0(trace)
    has_burst = fractional > threshold
    return BurstReport(
        has_burst=has_burst,
        is_delayed=has_burst and slope < 0,
        peak_time=peak_time,
        peak_rate=peak_rate,
        fractional_increase=fractional,
        initial_slope=slope,
    )
