"""Jerarquía de errores del paquete.

El CLI traduce ``InvalidInputError`` a exit code 2 y ``NumericalError`` a 3.
Cada servicio define sus subclases junto al código que las lanza.
"""


class SuperburstError(RuntimeError):
    """Base de todos los errores propios."""


class ConfigError(SuperburstError):
    """Configuración ilegible o fuera de rango."""


class InvalidInputError(SuperburstError):
    """Precondición violada: parámetros, geometría o descriptores inválidos."""


class NumericalError(SuperburstError):
    """Fallo numérico: no convergencia, integración o cierre inestable."""
