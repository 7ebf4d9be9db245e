import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class InitialState(BaseModel):
    """Estado producto ⊗(cos(θ/2)|g> + e^{iφ} sin(θ/2)|e>).

    ``fully_excited`` equivale a θ = π.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["fully_excited", "product"] = "fully_excited"
    theta: float = Field(math.pi, ge=0, le=math.pi)
    phi: float = 0.0

    @property
    def effective_theta(self) -> float:
        return math.pi if self.kind == "fully_excited" else self.theta

    @property
    def excited_population(self) -> float:
        return math.sin(self.effective_theta / 2) ** 2


FULLY_EXCITED = InitialState()


@dataclass(slots=True, frozen=True)
class EmissionTrace:
    """Serie temporal de la tasa total R(t), tiempos en unidades de 1/γ0."""

    times: np.ndarray
    rates: np.ndarray
    initial_rate: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.times.shape != self.rates.shape:
            raise ValueError("times y rates deben tener el mismo largo")

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(t), float(r)) for t, r in zip(self.times, self.rates)]


class BurstReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    has_burst: bool
    is_delayed: bool
    peak_time: float
    peak_rate: float
    fractional_increase: float = Field(
        ..., description="peak_rate / initial_rate - 1"
    )
    initial_slope: float
