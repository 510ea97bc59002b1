"""Numerical toolkit for q-plurisubharmonic functions on grids."""

__version__ = "0.1.0"
