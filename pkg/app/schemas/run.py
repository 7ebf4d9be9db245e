from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SweepSpec(BaseModel):
    """Rango de barrido ``param=start:stop[:steps][:log]``."""

    model_config = ConfigDict(frozen=True)

    parameter: str = Field(..., min_length=1)
    start: float
    stop: float
    steps: int = Field(1, ge=1)
    scale: Literal["linear", "log"] = "linear"
    parallelism: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_log(self) -> "SweepSpec":
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("Un rango log requiere extremos positivos")
        return self

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)

    def integer_values(self) -> list[int]:
        """Valores redondeados y sin duplicados, en orden creciente."""
        return sorted({int(round(v)) for v in self.values()})


class RunManifest(BaseModel):
    command: list[str]
    subcommand: str
    model: Optional[str] = None
    lattice: Optional[str] = None
    versions: dict[str, str]
    tolerances: dict[str, float]
    seed: int
    outputs: dict[str, str] = Field(
        default_factory=dict, description="archivo -> sha256"
    )
