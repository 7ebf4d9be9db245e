"""Subcomandos del CLI: un módulo por operación, agregados en ``router``.

Estas importaciones son intencionales para ayudar al análisis estático
a resolver `from app.api import <submodulo>`.
"""

from . import router as router  # noqa: F401
