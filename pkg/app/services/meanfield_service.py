"""Cierre de cumulantes de segundo orden sobre un anillo invariante por traslaciones.

Variables por clase de desplazamiento Δ = 1..N-1:
    p      = <e_x>
    s(Δ)   = <σ⁺_x σ⁻_{x+Δ}>
    q(Δ)   = <e_x e_{x+Δ}>
con <σ⁺σ⁻e> ≈ <σ⁺σ⁻><e>. Γ y J deben ser circulantes: g(Δ) = Γ[0, Δ],
j(Δ) = J[0, Δ]. Las sumas de tipo Σ_a f(a) s(Δ - a) son convoluciones
circulares y se evalúan con FFT.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy import fft
from scipy.integrate import solve_ivp

from app.core.config import Settings
from app.core.errors import InvalidInputError, NumericalError
from app.schemas.dynamics import FULLY_EXCITED, EmissionTrace, InitialState
from app.schemas.interaction import DecoherenceMatrix
from app.schemas.meanfield import CumulantState
from app.services.decoherence_service import ModelError
from app.services.dynamics_service import IntegrationError, default_time_grid

logger = logging.getLogger(__name__)

MAX_RING_SITES = 1024
CLOSURE_TOLERANCE = 1e-8


class ClosureError(NumericalError):
    """El cierre produjo |s(Δ)| > p: la aproximación dejó de ser consistente."""


# ---------------------------------------------------------------------------
# Perfiles circulantes
# ---------------------------------------------------------------------------

def circulant_profile(matrix: np.ndarray, name: str = "Γ") -> np.ndarray:
    """Primera fila de una matriz circulante; error si no lo es."""
    n = matrix.shape[0]
    row = matrix[0]
    idx = np.arange(n)
    rebuilt = row[(idx[None, :] - idx[:, None]) % n]
    if not np.allclose(matrix, rebuilt, atol=1e-12, rtol=0):
        raise ModelError(f"{name} no es invariante por traslaciones (circulante)")
    return row.astype(np.complex128)


def _coupling_profile(coupling: Optional[np.ndarray], n: int) -> Optional[np.ndarray]:
    if coupling is None:
        return None
    if coupling.shape != (n, n):
        raise ModelError("J y Γ deben tener la misma dimensión")
    return circulant_profile(coupling, "J")


def _circular(kernel: np.ndarray, s: np.ndarray) -> np.ndarray:
    """(kernel * s)(Δ) = Σ_a kernel(a) s(Δ - a)."""
    return fft.ifft(fft.fft(kernel) * fft.fft(s))


def _reversed(profile: np.ndarray) -> np.ndarray:
    """f(-Δ) indexado por Δ."""
    return np.roll(profile[::-1], 1)


# ---------------------------------------------------------------------------
# Ecuaciones de movimiento
# ---------------------------------------------------------------------------

def _derivatives(
    g: np.ndarray,
    jc: Optional[np.ndarray],
    p: float,
    s: np.ndarray,
    q: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """(ṗ, ṡ, q̇) con s[0] = q[0] = 0."""
    g0 = float(np.real(g[0]))
    g_minus = _reversed(g)
    total = np.sum(g[1:] * s[1:])

    p_dot = -g0 * p - float(np.real(total))

    conv = _circular(g_minus, s) - g0 * s
    s_dot = -g0 * s + g_minus * (2.0 * q - p) + (2.0 * p - 1.0) * conv
    q_dot = -2.0 * g0 * q - 2.0 * p * np.real(total) + 2.0 * p * np.real(g * s)

    if jc is not None:
        n = jc.shape[0]
        j_minus = _reversed(jc)
        s_minus = _reversed(s)
        # Σ_{a∉{0,Δ}} J_{a0} s(Δ-a)
        left = _circular(j_minus, s) - jc[0] * s
        # Σ_{b∉{0,Δ}} J_{Δb} s(b)
        idx = np.arange(n)
        right = jc[(idx[None, :] - idx[:, None]) % n] @ s - jc[0] * s
        s_dot = s_dot + 1j * (2.0 * p - 1.0) * (right - left)

        full = np.sum(jc[1:] * s[1:])
        p_dot += 2.0 * float(np.imag(full))
        # Σ_{a∉{0,Δ}} J_{a0} s(-a) y Σ_{a∉{0,Δ}} J_{aΔ} s(Δ-a)
        via_origin = full - j_minus * s_minus
        via_delta = full - jc * s
        q_dot = q_dot - 2.0 * p * (np.imag(via_origin) + np.imag(via_delta))

    s_dot[0] = 0.0
    q_dot[0] = 0.0
    return p_dot, s_dot, np.real(q_dot)


def _profile_from_state(state: CumulantState, n: int) -> tuple[np.ndarray, np.ndarray]:
    s = np.zeros(n, dtype=np.complex128)
    q = np.zeros(n)
    for delta in range(1, n):
        mirror = n - delta
        corr = state.correlations
        s[delta] = corr.get(delta, corr.get(mirror, 0.0))
        if state.populations is None:
            q[delta] = state.p * state.p
        else:
            pops = state.populations
            q[delta] = pops.get(delta, pops.get(mirror, state.p * state.p))
    return s, q


def cumulant_rate_derivative(
    gamma: DecoherenceMatrix,
    coupling: Optional[np.ndarray],
    state: CumulantState,
) -> float:
    """Ṙ = N[g0 ṗ + Re Σ_Δ g(Δ) ṡ(Δ)] bajo el cierre de segundo orden."""
    g = circulant_profile(gamma.entries)
    n = g.shape[0]
    jc = _coupling_profile(coupling, n)
    s, q = _profile_from_state(state, n)
    p_dot, s_dot, _ = _derivatives(g, jc, state.p, s, q)
    return n * (float(np.real(g[0])) * p_dot + float(np.real(np.sum(g[1:] * s_dot[1:]))))


def nn_meanfield_bound(
    dimension: int, p: float, c1: float, c2: float, n_sites: int = 1
) -> float:
    """-N(1 - 1/(8D))p - N(3/4 + 1/(2D))c₁ para 0 <= c₂ <= c₁ <= p <= 1."""
    if dimension < 1:
        raise InvalidInputError("La dimensión debe ser >= 1")
    if not 0.0 <= c2 <= c1 <= p <= 1.0:
        raise InvalidInputError(
            f"Se requiere 0 <= c2 <= c1 <= p <= 1 (p={p}, c1={c1}, c2={c2})"
        )
    per_site = -(1.0 - 1.0 / (8.0 * dimension)) * p - (0.75 + 0.5 / dimension) * c1
    return n_sites * per_site


# ---------------------------------------------------------------------------
# Integración
# ---------------------------------------------------------------------------

def _pack(p: float, s: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.concatenate([[p], s.real, s.imag, q])


def _unpack(y: np.ndarray, n: int) -> tuple[float, np.ndarray, np.ndarray]:
    p = float(y[0])
    s = y[1 : n + 1] + 1j * y[n + 1 : 2 * n + 1]
    q = y[2 * n + 1 :]
    return p, s, q


def initial_cumulants(n: int, state: InitialState) -> tuple[float, np.ndarray, np.ndarray]:
    """Estado producto: p = sin²(θ/2), s(Δ) = ¼ sin²θ, q(Δ) = p²."""
    theta = state.effective_theta
    p = float(np.sin(theta / 2.0) ** 2)
    s = np.full(n, 0.25 * np.sin(theta) ** 2, dtype=np.complex128)
    q = np.full(n, p * p)
    s[0] = 0.0
    q[0] = 0.0
    return p, s, q


def cumulant_evolve(
    gamma: DecoherenceMatrix,
    coupling: Optional[np.ndarray] = None,
    initial: InitialState = FULLY_EXCITED,
    t_grid=None,
    *,
    settings: Optional[Settings] = None,
) -> EmissionTrace:
    settings = settings or Settings()
    g = circulant_profile(gamma.entries)
    n = g.shape[0]
    if n > MAX_RING_SITES:
        raise InvalidInputError(f"Anillo limitado a N <= {MAX_RING_SITES}")
    jc = _coupling_profile(coupling, n)
    grid = np.asarray(default_time_grid(5.0) if t_grid is None else t_grid, dtype=float)
    p0, s0, q0 = initial_cumulants(n, initial)

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        p, s, q = _unpack(y, n)
        p_dot, s_dot, q_dot = _derivatives(g, jc, p, s, q)
        return _pack(p_dot, s_dot, q_dot)

    logger.info("Cumulantes: anillo N=%d, %d puntos hasta t=%.3g", n, grid.shape[0], grid[-1])
    y0 = _pack(p0, s0, q0)
    if grid.shape[0] == 1:
        ys = y0[:, None]
    else:
        sol = solve_ivp(
            rhs,
            (float(grid[0]), float(grid[-1])),
            y0,
            method="DOP853",
            t_eval=grid,
            rtol=settings.ode_rtol,
            atol=settings.ode_atol,
        )
        if not sol.success:
            raise IntegrationError(f"solve_ivp falló: {sol.message}")
        ys = sol.y

    g0 = float(np.real(g[0]))
    rates = np.empty(grid.shape[0])
    populations = np.empty(grid.shape[0])
    for k in range(grid.shape[0]):
        p, s, _ = _unpack(ys[:, k], n)
        worst = float(np.max(np.abs(s))) if n > 1 else 0.0
        if worst > p + CLOSURE_TOLERANCE:
            raise ClosureError(
                f"|s| = {worst:.6g} > p = {p:.6g} en t = {grid[k]:.6g}"
            )
        populations[k] = p
        rates[k] = n * (g0 * p + float(np.real(np.sum(g[1:] * s[1:]))))

    return EmissionTrace(
        times=grid,
        rates=rates,
        initial_rate=float(rates[0]),
        diagnostics={
            "solver": "meanfield",
            "n_sites": n,
            "final_population": float(populations[-1]),
        },
    )


def trajectory_cumulants(
    gamma: DecoherenceMatrix,
    initial: InitialState,
    t_grid,
    *,
    settings: Optional[Settings] = None,
) -> list[CumulantState]:
    """Estados (p, s(Δ), q(Δ)) sobre la grilla, para verificar cotas."""
    g = circulant_profile(gamma.entries)
    n = g.shape[0]
    grid = np.asarray(t_grid, dtype=float)
    p0, s0, q0 = initial_cumulants(n, initial)
    settings = settings or Settings()

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        p, s, q = _unpack(y, n)
        return _pack(*_derivatives(g, None, p, s, q))

    sol = solve_ivp(
        rhs,
        (float(grid[0]), float(grid[-1])),
        _pack(p0, s0, q0),
        method="DOP853",
        t_eval=grid,
        rtol=settings.ode_rtol,
        atol=settings.ode_atol,
    )
    if not sol.success:
        raise IntegrationError(f"solve_ivp falló: {sol.message}")
    states = []
    for k in range(grid.shape[0]):
        p, s, q = _unpack(sol.y[:, k], n)
        states.append(
            CumulantState(
                p=min(max(p, 0.0), 1.0),
                correlations={d: float(s[d].real) for d in range(1, n)},
                populations={d: float(q[d]) for d in range(1, n)},
            )
        )
    return states
