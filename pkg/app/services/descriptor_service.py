"""Parseo y formato de los descriptores del CLI.

Gramática:
    modelo   kind:k=v[,k=v...]         (nn_nonuniform: gammas=a/b/c)
    red      D:n1xn2...[:periodic][:d=x]
    estado   fully_excited | product:theta=x[,phi=y]
    acople   none | all:J | custom:ARCHIVO
    barrido  param=start:stop[:steps][:log]

``format_*`` produce la forma canónica: parse(format(x)) == x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import ValidationError

from app.core.errors import InvalidInputError
from app.schemas.dynamics import FULLY_EXCITED, InitialState
from app.schemas.interaction import INTERACTION_ADAPTER
from app.schemas.lattice import LatticeSpec
from app.schemas.run import SweepSpec
from app.services.decoherence_service import build_coherent_coupling, model_tag

_KINDS = ("nn", "nn_nonuniform", "nnn", "exp", "power", "chiral", "dicke")


class DescriptorError(InvalidInputError):
    """Descriptor mal formado; el mensaje nombra el token ofensivo."""


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    loc = ".".join(str(x) for x in err.get("loc", ()))
    return f"{loc}: {err.get('msg')}" if loc else str(err.get("msg"))


def _number(token: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise DescriptorError(f"Número inválido en {token!r}: {text!r}") from exc
    if not math.isfinite(value):
        raise DescriptorError(f"Valor no finito en {token!r}")
    return value


def _key_values(token: str, body: str) -> dict[str, str]:
    out: dict[str, str] = {}
    if not body:
        return out
    for part in body.split(","):
        key, sep, value = part.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise DescriptorError(f"Se esperaba clave=valor en {token!r}: {part!r}")
        if key.strip() in out:
            raise DescriptorError(f"Clave repetida en {token!r}: {key.strip()!r}")
        out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# Modelo
# ---------------------------------------------------------------------------

def parse_model(text: str):
    kind, _, body = text.strip().partition(":")
    if kind not in _KINDS:
        raise DescriptorError(f"Modelo desconocido: {kind!r} (opciones: {', '.join(_KINDS)})")
    raw = _key_values(text, body)
    fields: dict = {"kind": kind}
    for key, value in raw.items():
        if key == "gammas":
            fields[key] = [_number(text, v) for v in value.split("/")]
        else:
            fields[key] = _number(text, value)
    try:
        return INTERACTION_ADAPTER.validate_python(fields)
    except ValidationError as exc:
        raise DescriptorError(f"Modelo inválido {text!r}: {_first_error(exc)}") from exc


def format_model(model) -> str:
    return model_tag(model)


# ---------------------------------------------------------------------------
# Red
# ---------------------------------------------------------------------------

def parse_lattice(text: str) -> LatticeSpec:
    parts = text.strip().split(":")
    if len(parts) < 2:
        raise DescriptorError(f"Red inválida {text!r}: se esperaba D:n1xn2...")
    try:
        dimension = int(parts[0])
        extents = tuple(int(x) for x in parts[1].split("x"))
    except ValueError as exc:
        raise DescriptorError(f"Red inválida {text!r}: {parts[0]}:{parts[1]}") from exc

    boundary = "open"
    spacing = 1.0
    for option in parts[2:]:
        if option == "periodic":
            boundary = "periodic"
        elif option.startswith("d="):
            spacing = _number(text, option[2:])
        else:
            raise DescriptorError(f"Opción de red desconocida en {text!r}: {option!r}")
    try:
        return LatticeSpec(
            dimension=dimension, extents=extents, boundary=boundary, spacing=spacing
        )
    except ValidationError as exc:
        raise DescriptorError(f"Red inválida {text!r}: {_first_error(exc)}") from exc


def format_lattice(spec: LatticeSpec) -> str:
    out = f"{spec.dimension}:" + "x".join(str(n) for n in spec.extents)
    if spec.is_ring:
        out += ":periodic"
    if spec.spacing != 1.0:
        out += f":d={spec.spacing!r}"
    return out


# ---------------------------------------------------------------------------
# Estado inicial
# ---------------------------------------------------------------------------

def parse_state(text: str) -> InitialState:
    kind, _, body = text.strip().partition(":")
    if kind == "fully_excited" and not body:
        return FULLY_EXCITED
    if kind != "product":
        raise DescriptorError(f"Estado desconocido: {text!r}")
    raw = _key_values(text, body)
    unknown = set(raw) - {"theta", "phi"}
    if unknown or "theta" not in raw:
        raise DescriptorError(f"Estado producto requiere theta[,phi]: {text!r}")
    try:
        return InitialState(
            kind="product",
            theta=_number(text, raw["theta"]),
            phi=_number(text, raw.get("phi", "0")),
        )
    except ValidationError as exc:
        raise DescriptorError(f"Estado inválido {text!r}: {_first_error(exc)}") from exc


def format_state(state: InitialState) -> str:
    if state.kind == "fully_excited":
        return "fully_excited"
    return f"product:theta={state.theta!r},phi={state.phi!r}"


# ---------------------------------------------------------------------------
# Acople coherente
# ---------------------------------------------------------------------------

@dataclass(slots=True, frozen=True)
class CouplingSpec:
    kind: str
    strength: float = 0.0
    path: Optional[str] = None

    def build(self, n_sites: int) -> Optional[np.ndarray]:
        if self.kind == "custom":
            try:
                matrix = np.loadtxt(self.path, delimiter=",", ndmin=2)
            except (OSError, ValueError) as exc:
                raise DescriptorError(f"No se pudo leer J de {self.path!r}: {exc}") from exc
            return build_coherent_coupling("custom", n_sites, matrix=matrix)
        return build_coherent_coupling(self.kind, n_sites, strength=self.strength)


NO_COUPLING = CouplingSpec(kind="none")


def parse_coupling(text: str) -> CouplingSpec:
    kind, _, body = text.strip().partition(":")
    if kind == "none" and not body:
        return NO_COUPLING
    if kind == "all" and body:
        return CouplingSpec(kind="all_to_all", strength=_number(text, body))
    if kind == "custom" and body:
        return CouplingSpec(kind="custom", path=body)
    raise DescriptorError(f"Acople inválido: {text!r} (none | all:J | custom:ARCHIVO)")


def format_coupling(spec: CouplingSpec) -> str:
    if spec.kind == "all_to_all":
        return f"all:{spec.strength!r}"
    if spec.kind == "custom":
        return f"custom:{spec.path}"
    return "none"


# ---------------------------------------------------------------------------
# Barrido
# ---------------------------------------------------------------------------

def _default_steps(start: float, stop: float, scale: str) -> int:
    if scale == "log":
        decades = abs(math.log10(stop) - math.log10(start))
        return int(round(4 * decades)) + 1
    return 11


def parse_sweep(text: str) -> SweepSpec:
    parameter, sep, body = text.strip().partition("=")
    if not sep or not parameter:
        raise DescriptorError(f"Barrido inválido {text!r}: se esperaba param=start:stop")
    parts = body.split(":")
    parallelism = None
    if parts and parts[-1].startswith("par="):
        try:
            parallelism = int(parts[-1][4:])
        except ValueError as exc:
            raise DescriptorError(f"par inválido en {text!r}: {parts[-1]!r}") from exc
        parts = parts[:-1]
    scale = "linear"
    if parts and parts[-1] == "log":
        scale = "log"
        parts = parts[:-1]
    if len(parts) not in (2, 3):
        raise DescriptorError(
            f"Barrido inválido {text!r}: se esperaba start:stop[:steps][:log][:par=K]"
        )
    start = _number(text, parts[0])
    stop = _number(text, parts[1])
    if len(parts) == 3:
        try:
            steps = int(parts[2])
        except ValueError as exc:
            raise DescriptorError(f"steps inválido en {text!r}: {parts[2]!r}") from exc
    else:
        if scale == "log" and (start <= 0 or stop <= 0):
            raise DescriptorError(f"Un rango log requiere extremos positivos: {text!r}")
        steps = _default_steps(start, stop, scale)
    try:
        return SweepSpec(
            parameter=parameter,
            start=start,
            stop=stop,
            steps=steps,
            scale=scale,
            parallelism=parallelism,
        )
    except ValidationError as exc:
        raise DescriptorError(f"Barrido inválido {text!r}: {_first_error(exc)}") from exc


def format_sweep(spec: SweepSpec) -> str:
    out = f"{spec.parameter}={spec.start!r}:{spec.stop!r}:{spec.steps}"
    if spec.scale == "log":
        out += ":log"
    if spec.parallelism is not None:
        out += f":par={spec.parallelism}"
    return out
