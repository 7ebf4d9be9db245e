from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(slots=True, frozen=True)
class SpectralSummary:
    """Espectro de Γ y potencias de la traza.

    ``eigenvalues`` en orden descendente; ``eigenvectors[:, k]`` corresponde a
    ``eigenvalues[k]`` con la primera componente no nula real y positiva.
    """

    eigenvalues: np.ndarray
    min_eigenvalue: float
    trace_gamma: float
    trace_gamma2: float
    trace_gamma3: float
    is_physical: bool
    tolerance: float
    eigenvectors: Optional[np.ndarray] = None

    @property
    def n_sites(self) -> int:
        return int(self.eigenvalues.shape[0])

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "min_eigenvalue": self.min_eigenvalue,
            "trace_gamma": self.trace_gamma,
            "trace_gamma2": self.trace_gamma2,
            "trace_gamma3": self.trace_gamma3,
            "is_physical": self.is_physical,
            "tolerance": self.tolerance,
        }
