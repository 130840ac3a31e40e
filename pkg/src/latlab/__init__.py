"""Numerical laboratory for unimodular lattices and their unipotent orbits."""

__version__ = "0.1.0"
