"""Geometry of numbers toolkit: lattices, gauge bodies, successive minima,
compound lattices, parametric profiles and star-body searches."""

__version__ = "0.1.0"
