"""Escritura de resultados CSV/JSON y manifiesto de corrida.

CSV: encabezado fijo, floats con ``%.17g``, fin de línea LF.
JSON: claves ordenadas; arrays numpy convertidos a listas.
Cada archivo escrito queda registrado con su sha256.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from app.schemas.run import RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def format_float(value: float) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"No serializable a JSON: {type(obj).__name__}")


def json_text(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class OutputWriter:
    """Único escritor de una corrida: escribe archivos y acumula checksums."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = Path(out_dir)
        self.outputs: dict[str, str] = {}

    def _write(self, name: str, text: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        # newline="" para que no se traduzca \n en Windows
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        self.outputs[name] = sha256_file(path)
        logger.info("Escrito %s (%d bytes)", path, len(text.encode("utf-8")))
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self._write(name, csv_text(header, rows))

    def write_json(self, name: str, payload: Any) -> Path:
        return self._write(name, json_text(payload))

    def write_manifest(self, manifest: RunManifest) -> Path:
        data = manifest.model_copy(update={"outputs": dict(self.outputs)})
        path = self.out_dir / MANIFEST_NAME
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(json_text(data.model_dump(mode="json")))
        return path
