"""Projection pursuit over the unit sphere, with spectral and entropy diagnostics."""

__version__ = "0.1.0"
