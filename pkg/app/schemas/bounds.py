from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

BoundMethod = Literal["gershgorin_nn", "exponential_1d", "powerlaw_1d", "brute_force"]


class RateBound(BaseModel):
    """Cota superior de la tasa de emisión máxima (λ_max de H_Γ)."""

    model_config = ConfigDict(frozen=True)

    model_tag: str
    n_sites: int = Field(..., ge=1)
    bound_value: float
    method: BoundMethod
    certifies_no_burst: bool
    exact_sum_value: Optional[float] = Field(
        None, description="Maximización sobre m' entero (más ajustada)"
    )

    @model_validator(mode="after")
    def check_floor(self) -> "RateBound":
        # el estado totalmente excitado ya alcanza N
        if self.bound_value < self.n_sites * (1 - 1e-9):
            raise ValueError("La cota no puede ser menor que N")
        return self
