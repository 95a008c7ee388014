"""Exact moment, cumulant and bound computations for vectors of multiple Wiener-Ito integrals."""

__version__ = "0.1.0"
