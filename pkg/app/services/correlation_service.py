"""Testigos de superradiancia: g²(0), g³(0), Ṙ(0), R̈(0) y acoples críticos."""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import bisect, brentq

from app.core.errors import InvalidInputError
from app.schemas.correlation import CorrelationReport, CriticalCoupling, RegionVerdict
from app.schemas.interaction import (
    SCALAR_KINDS,
    AllToAll,
    DecoherenceMatrix,
    Exponential,
    NearestNeighbor,
    PowerLaw,
)
from app.schemas.lattice import LatticeSpec
from app.schemas.spectral import SpectralSummary
from app.services import lattice_sums_service, spectral_service
from app.services.decoherence_service import ModelError
from app.services.spectral_service import SpectralError, UnphysicalMatrixError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Correlaciones a t = 0 desde las trazas
# ---------------------------------------------------------------------------

def g2_from_traces(n: int, trace_gamma: float, trace_gamma2: float) -> float:
    return 1.0 - 2.0 / n + trace_gamma2 / trace_gamma**2


def g3_from_traces(
    n: int, trace_gamma: float, trace_gamma2: float, trace_gamma3: float
) -> float:
    return (
        1.0
        - 6.0 / n
        + 12.0 / n**2
        + 3.0 * (1.0 - 4.0 / n) * trace_gamma2 / trace_gamma**2
        + 2.0 * trace_gamma3 / trace_gamma**3
    )


def g2_zero(summary: SpectralSummary) -> float:
    if summary.n_sites < 2:
        raise InvalidInputError("g²(0) requiere N >= 2")
    return g2_from_traces(summary.n_sites, summary.trace_gamma, summary.trace_gamma2)


def g3_zero(summary: SpectralSummary) -> float:
    if summary.n_sites < 3:
        raise InvalidInputError("g³(0) requiere N >= 3")
    return g3_from_traces(
        summary.n_sites,
        summary.trace_gamma,
        summary.trace_gamma2,
        summary.trace_gamma3,
    )


def rdot0(summary: SpectralSummary) -> float:
    """Ṙ(0) = R(0)²(g² - 1) con R(0) = Tr Γ."""
    return summary.trace_gamma**2 * (g2_zero(summary) - 1.0)


def rddot0(summary: SpectralSummary) -> float:
    n = summary.n_sites
    tr1 = summary.trace_gamma
    return (
        8.0 / n**2 * tr1**3
        - 8.0 / n * tr1 * summary.trace_gamma2
        + summary.trace_gamma3
    )


def correlation_report(summary: SpectralSummary) -> CorrelationReport:
    g2 = g2_zero(summary)
    return CorrelationReport(
        n_sites=summary.n_sites,
        g2=g2,
        g3=g3_zero(summary) if summary.n_sites >= 3 else None,
        rdot0=rdot0(summary),
        rddot0=rddot0(summary),
        is_superradiant=g2 > 1.0,
    )


# ---------------------------------------------------------------------------
# Acople crítico γ_s
# ---------------------------------------------------------------------------

def _asymptotic_gamma_s(model, lattice: LatticeSpec) -> CriticalCoupling:
    dim = lattice.dimension
    if isinstance(model, NearestNeighbor):
        value = 1.0 / math.sqrt(2.0 * dim)
    elif isinstance(model, Exponential):
        value = (
            1.0 / math.sqrt(3.0)
            if dim == 1
            else lattice_sums_service.bulk_gamma_s_exponential(dim)
        )
    elif isinstance(model, PowerLaw) and dim == 1:
        value = math.sqrt(3.0) / math.pi
    else:
        # dicke y power-law en D >= 2: γ_s -> 0
        raise ModelError(f"γ_s de {model.kind} en D={dim} no tiene límite finito")
    return CriticalCoupling(value=value, method="asymptotic")


def gamma_s(
    model,
    lattice: LatticeSpec,
    tol: float = spectral_service.DEFAULT_TOLERANCE,
    *,
    asymptotic: bool = False,
) -> CriticalCoupling:
    """γ donde g²(0) cruza 1, buscado en (0, 1]."""
    if model.kind not in SCALAR_KINDS:
        raise ModelError(f"gamma_s requiere un acople escalar, no {model.kind}")
    if asymptotic:
        return _asymptotic_gamma_s(model, lattice)

    n = lattice.n_sites
    if n < 2:
        raise InvalidInputError("γ_s requiere N >= 2")

    if isinstance(model, (NearestNeighbor, PowerLaw, AllToAll)):
        # g² - 1 = (γ² S₂ - N)/N²
        s2 = lattice_sums_service.off_diagonal_weight(model, lattice)
        if s2 == 0:
            return CriticalCoupling(value=None, method="none", has_transition=False)
        value = math.sqrt(n / s2)
        if value > 1.0 + tol:
            return CriticalCoupling(value=None, method="none", has_transition=False)
        return CriticalCoupling(value=min(value, 1.0), method="closed_form")

    def excess(g: float) -> float:
        return lattice_sums_service.trace_gamma2_sum(model, lattice, g) - 2.0 * n

    top = excess(1.0)
    if top < 0:
        return CriticalCoupling(value=None, method="none", has_transition=False)
    if top == 0:
        return CriticalCoupling(value=1.0, method="bisection")
    root = bisect(excess, 0.0, 1.0, xtol=1e-13)
    logger.debug("γ_s por bisección: %s N=%d -> %.12f", model.kind, n, root)
    return CriticalCoupling(value=float(root), method="bisection")


def nn_chain_gamma_s(n: int) -> float:
    return n / math.sqrt(2.0 * n * (n - 1))


def nn_hyperrectangle_gamma_s(extents: tuple[int, ...]) -> float:
    return (2.0 * sum(1.0 - 1.0 / nj for nj in extents)) ** -0.5


# ---------------------------------------------------------------------------
# Anillo NNN
# ---------------------------------------------------------------------------

def nnn_is_physical(g1: float, g2: float) -> bool:
    region_one = g1 - g2 <= 0.5 and g1 > 4.0 * g2
    region_two = g1**2 + 8.0 * g2**2 <= 4.0 * g2 and g1 <= 4.0 * g2
    return region_one or region_two


def nnn_region(g1: float, g2: float) -> RegionVerdict:
    if not nnn_is_physical(g1, g2):
        region = "unphysical"
    elif g1**2 + g2**2 > 0.5:
        region = "superradiant"
    else:
        region = "physical_no_burst"
    return RegionVerdict(g1=g1, g2=g2, region=region)


def nnn_min_gamma2() -> float:
    return (4.0 - math.sqrt(2.0)) / 14.0


# ---------------------------------------------------------------------------
# Estados producto
# ---------------------------------------------------------------------------

def product_state_rdot0(gamma: DecoherenceMatrix, theta: float, phi: float = 0.0) -> float:
    """Ṙ(0) para ⊗(cos(θ/2)|g> + e^{iφ} sin(θ/2)|e>) con Γ real.

    Las sumas primadas recorren índices distintos; φ no interviene.
    """
    if not gamma.is_real:
        raise ModelError("La fórmula de estado producto requiere Γ real")
    n = gamma.n_sites
    off = np.array(gamma.entries, dtype=float)
    np.fill_diagonal(off, 0.0)

    s = math.sin(theta / 2.0) ** 2
    sin2 = math.sin(theta) ** 2
    sum1 = float(off.sum())
    sum2 = float(np.sum(off**2))
    rows = off.sum(axis=1)
    # Σ'_{lmn} γ_mn(γ_ml + γ_nl) = 2 Σ_m [(Σ_n γ_mn)² - Σ_n γ_mn²]
    sum3 = 2.0 * float(np.sum(rows**2) - sum2)
    return (
        -n * s
        - 0.5 * sin2 * sum1
        + 2.0 * s * (s - 0.5) * sum2
        + 0.25 * sin2 * (s - 0.5) * sum3
    )


def nn_hypercube_product_rdot0(dimension: int, gamma: float, theta: float) -> float:
    """Ṙ(0)/N sobre un D-toro NN (coordinación 2D uniforme)."""
    s = math.sin(theta / 2.0) ** 2
    z = 2.0 * dimension
    return (
        -s
        - 2.0 * z * gamma * s * (1.0 - s)
        + 2.0 * z * gamma**2 * s * (s - 0.5)
        + 2.0 * z * (z - 1.0) * gamma**2 * s * (1.0 - s) * (s - 0.5)
    )


# ---------------------------------------------------------------------------
# Estados de un salto
# ---------------------------------------------------------------------------

def one_jump_average_rate(gamma: DecoherenceMatrix, tol: float = 1e-10) -> float:
    """R̄₁ = (1/N) Σ_ν Γ_ν R_ν desde los autovectores de Γ."""
    summary = spectral_service.analyze(gamma, tol, with_vectors=True)
    if not summary.is_physical:
        raise UnphysicalMatrixError(
            f"Γ no es PSD (λ_min = {summary.min_eigenvalue:.3e})"
        )
    n = summary.n_sites
    vectors = summary.eigenvectors
    off = gamma.entries - np.diag(np.diag(gamma.entries))
    # R_ν = N - 1 + Σ_{j≠k} v*_jν γ_jk v_kν
    rates = (n - 1) + np.real(np.einsum("jv,jk,kv->v", vectors.conj(), off, vectors))
    average = float(np.sum(summary.eigenvalues * rates) / n)
    expected = n * g2_zero(summary)
    if abs(average - expected) > 1e-9 * abs(expected):
        raise SpectralError(
            f"R̄₁ = {average!r} no coincide con N·g² = {expected!r}"
        )
    return average


# ---------------------------------------------------------------------------
# Formas cerradas auxiliares
# ---------------------------------------------------------------------------

def chiral_g2_closed_form(n: int, kd: float, chi: float) -> float:
    sin_kd = math.sin(kd)
    if abs(sin_kd) < 1e-12:
        ratio = float(n * n)
    else:
        ratio = (math.sin(n * kd) / sin_kd) ** 2
    return 0.5 * (3.0 + chi**2 - 4.0 / n) + (1.0 - chi**2) / (2.0 * n**2) * ratio


def all_to_all_traces(n: int, gamma: float) -> tuple[float, float, float]:
    tr2 = n + n * (n - 1) * gamma**2
    tr3 = n + 3.0 * n * (n - 1) * gamma**2 + n * (n - 1) * (n - 2) * gamma**3
    return float(n), float(tr2), float(tr3)


def dicke_local_rddot0_closed_form(n: int, gamma: float) -> float:
    """R̈(0) = N - 5N(N-1)γ² + N(N-1)(N-2)γ³ para Dicke con pérdida local."""
    return n - 5.0 * n * (n - 1) * gamma**2 + n * (n - 1) * (n - 2) * gamma**3


def delayed_burst_threshold() -> float:
    """N mínimo con R̈(0) > 0 en γ_s para Dicke con pérdida local."""
    return 2.0 * (5.0 + 2.0 * math.sqrt(5.0))


def g3_window(n: int) -> Optional[tuple[float, float]]:
    """Intervalo (γ₃, γ_s) con g³ > 1 y g² < 1 en el modelo todos-con-todos."""
    if n < 3:
        raise InvalidInputError("g³(0) requiere N >= 3")

    def g3_excess(g: float) -> float:
        return g3_from_traces(n, *all_to_all_traces(n, g)) - 1.0

    upper = 1.0 / math.sqrt(n - 1)
    if g3_excess(upper) <= 0:
        return None
    lower = brentq(g3_excess, 0.0, upper, xtol=1e-15, rtol=1e-14)
    return float(lower), upper


def nn_uncertified_gap(lattice: LatticeSpec) -> Optional[tuple[float, float]]:
    """[1/(2D), γ_p]: NN físico pero fuera del certificado de Gershgorin."""
    certified = 1.0 / (2.0 * lattice.dimension)
    physical = spectral_service.gamma_p(NearestNeighbor(gamma=0.0), lattice)
    if physical <= certified:
        return None
    return certified, physical
