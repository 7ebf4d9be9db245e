from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

RegionClass = Literal["unphysical", "physical_no_burst", "superradiant"]


class CorrelationReport(BaseModel):
    """Testigos de superradiancia del estado totalmente excitado."""

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(..., ge=2)
    g2: float
    g3: Optional[float] = Field(None, description="None si N < 3")
    rdot0: float = Field(..., description="Ṙ(0) = N²(g² - 1)")
    rddot0: float
    is_superradiant: bool


class RegionVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    g1: float = Field(..., ge=0, le=1)
    g2: float = Field(..., ge=0, le=1)
    region: RegionClass


class CriticalCoupling(BaseModel):
    """Resultado de γ_s: valor o ausencia explícita de transición."""

    model_config = ConfigDict(frozen=True)

    value: Optional[float] = None
    method: Literal["closed_form", "bisection", "asymptotic", "none"]
    has_transition: bool = True
