from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CumulantState(BaseModel):
    """Estado invariante por traslaciones en el cierre de segundo orden.

    ``correlations[Δ] = <σ⁺_x σ⁻_{x+Δ}>`` y ``populations[Δ] = <e_x e_{x+Δ}>``
    para Δ = 1..N-1 sobre el anillo. Si ``populations`` falta se usa p².
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=0, le=1, description="Población por sitio <e>")
    correlations: dict[int, float] = Field(default_factory=dict)
    populations: Optional[dict[int, float]] = None

    @field_validator("correlations", mode="before")
    @classmethod
    def reject_complex(cls, v):
        out = {}
        for key, value in dict(v).items():
            if isinstance(value, complex):
                if abs(value.imag) > 1e-12:
                    raise ValueError("Las correlaciones deben ser reales")
                value = value.real
            out[int(key)] = float(value)
        return out

    @model_validator(mode="after")
    def check_bounds(self) -> "CumulantState":
        for delta, c in self.correlations.items():
            if delta == 0:
                raise ValueError("Δ = 0 no es una correlación de pares")
            if abs(c) > self.p + 1e-12:
                raise ValueError(f"|c_{delta}| = {abs(c)} excede p = {self.p}")
        return self

    def correlation(self, delta: int) -> float:
        return self.correlations.get(delta, 0.0)

    def population(self, delta: int) -> float:
        if self.populations is None:
            return self.p * self.p
        return self.populations.get(delta, self.p * self.p)
