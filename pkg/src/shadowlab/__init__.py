"""Numerical laboratory for shadowing of linear fractional composition operators on H^2."""

__version__ = "0.1.0"
