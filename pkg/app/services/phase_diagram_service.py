"""Diagrama de fases del anillo NNN en el plano (γ₁, γ₂).

Cada celda se clasifica con las regiones analíticas (N -> ∞) y con el
espectro exacto de un anillo finito de N_check sitios. Las discrepancias se
miden como distancia a la frontera analítica.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from app.core.errors import InvalidInputError

logger = logging.getLogger(__name__)

CLASS_NAMES = ("unphysical", "physical_no_burst", "superradiant")
UNPHYSICAL, NO_BURST, SUPERRADIANT = 0, 1, 2

_ROWS_PER_CHUNK = 32


@dataclass(slots=True, frozen=True)
class PhaseDiagram:
    """Clases por celda; ``analytic[i, k]`` corresponde a (g1[i], g2[k])."""

    g1: np.ndarray
    g2: np.ndarray
    analytic: np.ndarray
    finite: np.ndarray
    n_check: int
    resolution: float

    def rows(self):
        for i, a in enumerate(self.g1):
            for k, b in enumerate(self.g2):
                yield (
                    float(a),
                    float(b),
                    CLASS_NAMES[self.analytic[i, k]],
                    CLASS_NAMES[self.finite[i, k]],
                )


def axis_values(resolution: float) -> np.ndarray:
    """0, res, 2·res, ... <= 1 (redondeados para que las celdas sean exactas)."""
    count = int(math.floor(1.0 / resolution + 1e-9)) + 1
    return np.round(np.arange(count) * resolution, 12)


# ---------------------------------------------------------------------------
# Clasificación
# ---------------------------------------------------------------------------

def classify_analytic(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    a, b = np.meshgrid(g1, g2, indexing="ij")
    region_one = (a - b <= 0.5) & (a > 4.0 * b)
    region_two = (a**2 + 8.0 * b**2 <= 4.0 * b) & (a <= 4.0 * b)
    physical = region_one | region_two
    burst = a**2 + b**2 > 0.5
    out = np.full(a.shape, UNPHYSICAL, dtype=np.int8)
    out[physical] = NO_BURST
    out[physical & burst] = SUPERRADIANT
    return out


def _finite_chunk(
    g1: np.ndarray, g2: np.ndarray, n_check: int, tol: float
) -> np.ndarray:
    nu = np.arange(n_check)
    c1 = np.cos(2.0 * np.pi * nu / n_check)
    c2 = np.cos(4.0 * np.pi * nu / n_check)
    # min_ν 1 + 2γ₁cos(2πν/N) + 2γ₂cos(4πν/N)
    spectrum = (
        1.0
        + 2.0 * g1[:, None, None] * c1[None, None, :]
        + 2.0 * g2[None, :, None] * c2[None, None, :]
    )
    lowest = spectrum.min(axis=2)
    physical = lowest >= -tol * n_check
    a, b = np.meshgrid(g1, g2, indexing="ij")
    # g² > 1 ⇔ Tr Γ² > 2N ⇔ γ₁² + γ₂² > ½ (N impar >= 5)
    burst = a**2 + b**2 > 0.5
    out = np.full(a.shape, UNPHYSICAL, dtype=np.int8)
    out[physical] = NO_BURST
    out[physical & burst] = SUPERRADIANT
    return out


def classify_finite(
    g1: np.ndarray, g2: np.ndarray, n_check: int, tol: float = 1e-10, threads: int = 1
) -> np.ndarray:
    if n_check < 5 or n_check % 2 == 0:
        raise InvalidInputError(f"N_check debe ser impar >= 5: {n_check}")
    chunks = [g1[i : i + _ROWS_PER_CHUNK] for i in range(0, g1.shape[0], _ROWS_PER_CHUNK)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda c: _finite_chunk(c, g2, n_check, tol), chunks))
    return np.concatenate(parts, axis=0)


def build_phase_diagram(
    resolution: float, n_check: int = 101, tol: float = 1e-10, threads: int = 1
) -> PhaseDiagram:
    if not 1e-4 <= resolution <= 1e-1:
        raise InvalidInputError(f"Resolución fuera de [1e-4, 1e-1]: {resolution}")
    axis = axis_values(resolution)
    logger.info(
        "Diagrama NNN: %d x %d celdas, N_check=%d", axis.shape[0], axis.shape[0], n_check
    )
    return PhaseDiagram(
        g1=axis,
        g2=axis,
        analytic=classify_analytic(axis, axis),
        finite=classify_finite(axis, axis, n_check, tol, threads),
        n_check=n_check,
        resolution=resolution,
    )


# ---------------------------------------------------------------------------
# Resumen
# ---------------------------------------------------------------------------

def _min_g2(classes: np.ndarray, g2: np.ndarray):
    cols = np.flatnonzero(np.any(classes == SUPERRADIANT, axis=0))
    return float(g2[cols[0]]) if cols.size else None


def boundary_band(diagram: PhaseDiagram) -> float:
    """Máxima distancia (en unidades de γ) de una discrepancia a la frontera analítica."""
    cls = diagram.analytic
    boundary = np.zeros(cls.shape, dtype=bool)
    boundary[:-1, :] |= cls[:-1, :] != cls[1:, :]
    boundary[1:, :] |= cls[:-1, :] != cls[1:, :]
    boundary[:, :-1] |= cls[:, :-1] != cls[:, 1:]
    boundary[:, 1:] |= cls[:, :-1] != cls[:, 1:]
    mismatch = cls != diagram.finite
    if not mismatch.any():
        return 0.0
    if not boundary.any():
        return math.inf
    distance = distance_transform_edt(~boundary) * diagram.resolution
    return float(distance[mismatch].max())


def summarize(diagram: PhaseDiagram) -> dict:
    analytic = diagram.analytic
    band = boundary_band(diagram)
    summary = {
        "resolution": diagram.resolution,
        "n_check": diagram.n_check,
        "cells": int(analytic.size),
        "min_g2_superradiant": _min_g2(analytic, diagram.g2),
        "min_g2_superradiant_finite": _min_g2(diagram.finite, diagram.g2),
        "expected_min_g2": (4.0 - math.sqrt(2.0)) / 14.0,
        "disagreements": int(np.count_nonzero(analytic != diagram.finite)),
        "band_width": band,
        "superradiant_on_g2_zero": int(np.count_nonzero(analytic[:, 0] == SUPERRADIANT)),
        "superradiant_on_g1_zero": int(np.count_nonzero(analytic[0, :] == SUPERRADIANT)),
    }
    if summary["disagreements"]:
        logger.warning(
            "Clasificación finita difiere en %d celdas (banda %.3g)",
            summary["disagreements"],
            band,
        )
    return summary
