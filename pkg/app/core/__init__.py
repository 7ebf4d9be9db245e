"""Núcleo: configuración, versión y errores."""
