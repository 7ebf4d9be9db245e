from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator


class _ModelBase(BaseModel):
    model_config = ConfigDict(frozen=True)


class NearestNeighbor(_ModelBase):
    kind: Literal["nn"] = "nn"
    gamma: float = Field(..., ge=0, le=1, description="Acople a primeros vecinos")


class NearestNeighborNonuniform(_ModelBase):
    """Cadena abierta 1D con acoples γ_1..γ_{N-1} distintos."""

    kind: Literal["nn_nonuniform"] = "nn_nonuniform"
    gammas: tuple[float, ...] = Field(..., min_length=1)

    @field_validator("gammas", mode="before")
    @classmethod
    def coerce_gammas(cls, v):
        values = tuple(float(x) for x in v)
        if any(g < 0 or g > 1 for g in values):
            raise ValueError("Cada γ_j debe estar en [0, 1]")
        return values


class NextNearestRing(_ModelBase):
    kind: Literal["nnn"] = "nnn"
    g1: float = Field(..., ge=0, le=1)
    g2: float = Field(..., ge=0, le=1)


class Exponential(_ModelBase):
    """γ_ij = γ^{r_ij/d}, con γ = e^{-κd}."""

    kind: Literal["exp"] = "exp"
    gamma: float = Field(..., ge=0, le=1)


class PowerLaw(_ModelBase):
    """γ_ij = γ·d/r_ij (exponente fijo en 1)."""

    kind: Literal["power"] = "power"
    gamma: float = Field(..., gt=0)


class ChiralInfiniteRange(_ModelBase):
    kind: Literal["chiral"] = "chiral"
    kd: float
    chi: float = Field(..., ge=-1, le=1, description="Quiralidad χ")


class AllToAll(_ModelBase):
    """Dicke con disipación local: γ_ij = δ_ij + (1-δ_ij)γ."""

    kind: Literal["dicke"] = "dicke"
    gamma: float = Field(..., ge=0, le=1)


InteractionModel = Annotated[
    Union[
        NearestNeighbor,
        NearestNeighborNonuniform,
        NextNearestRing,
        Exponential,
        PowerLaw,
        ChiralInfiniteRange,
        AllToAll,
    ],
    Field(discriminator="kind"),
]

INTERACTION_ADAPTER: TypeAdapter = TypeAdapter(InteractionModel)

# modelos con un único acople escalar γ (familias monótonas en γ)
SCALAR_KINDS = frozenset({"nn", "exp", "power", "dicke"})


def with_gamma(model, gamma: float):
    """Copia del modelo escalar con otro γ."""
    return model.model_copy(update={"gamma": float(gamma)})


@dataclass(slots=True, frozen=True)
class DecoherenceMatrix:
    """Matriz Γ hermítica con diagonal unitaria (Tr Γ = N)."""

    entries: np.ndarray
    model_tag: str

    @property
    def n_sites(self) -> int:
        return int(self.entries.shape[0])

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries) or not np.any(self.entries.imag)

    def to_dict(self) -> dict:
        out: dict = {"n_sites": self.n_sites, "model": self.model_tag}
        if self.is_real:
            out["entries"] = np.real(self.entries).tolist()
        else:
            out["entries_re"] = self.entries.real.tolist()
            out["entries_im"] = self.entries.imag.tolist()
        return out
