from math import prod
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LatticeSpec(BaseModel):
    """Geometría del arreglo de emisores.

    Índices en orden row-major sobre ``extents`` (el último eje varía más
    rápido). Condiciones periódicas sólo en 1D (anillo).
    """

    model_config = ConfigDict(frozen=True)

    dimension: int = Field(..., ge=1, description="Dimensión D del arreglo")
    extents: tuple[int, ...] = Field(..., description="Tamaños n_1..n_D")
    boundary: Literal["open", "periodic"] = Field(
        "open", description="Condición de borde"
    )
    spacing: float = Field(1.0, gt=0, description="Constante de red d")

    @field_validator("extents", mode="before")
    @classmethod
    def coerce_extents(cls, v):
        if isinstance(v, int):
            return (v,)
        return tuple(int(x) for x in v)

    @model_validator(mode="after")
    def check_geometry(self) -> "LatticeSpec":
        if len(self.extents) != self.dimension:
            raise ValueError(
                f"extents tiene {len(self.extents)} ejes, se esperaban {self.dimension}"
            )
        if any(n < 1 for n in self.extents):
            raise ValueError("Cada extent debe ser >= 1")
        if self.boundary == "periodic":
            if self.dimension != 1:
                raise ValueError("Borde periódico sólo soportado en 1D (anillo)")
            if min(self.extents) < 3:
                raise ValueError("Borde periódico requiere extents >= 3")
        return self

    @property
    def n_sites(self) -> int:
        return prod(self.extents)

    @property
    def is_ring(self) -> bool:
        return self.boundary == "periodic"

    @property
    def is_hypercube(self) -> bool:
        return len(set(self.extents)) == 1


class SitePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int = Field(..., ge=0)
    j: int = Field(..., ge=0)
    separation: float = Field(..., ge=0)
    graph_distance: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_distinct(self) -> "SitePair":
        if self.i == self.j:
            raise ValueError("Un par de sitios requiere i != j")
        return self


def chain(n: int, periodic: bool = False, spacing: float = 1.0) -> LatticeSpec:
    """Atajo para cadenas/anillos 1D."""
    return LatticeSpec(
        dimension=1,
        extents=(n,),
        boundary="periodic" if periodic else "open",
        spacing=spacing,
    )


def hypercube(dimension: int, n: int) -> LatticeSpec:
    return LatticeSpec(dimension=dimension, extents=(n,) * dimension)
