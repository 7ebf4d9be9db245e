"""Modelos de datos (pydantic) y registros numéricos inmutables."""
