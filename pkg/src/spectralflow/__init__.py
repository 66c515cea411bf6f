"""Spectral-curve geometry, topological recursion and dispersive
tau-function numerics."""

__version__ = "0.1.0"
