"""Pseudo-spectral simulation and verification tools for the nonlocal
Gross-Pitaevskii equation with nonvanishing condition at infinity."""

from nlgp.grid import Field, Grid, Space, make_grid

__all__ = ["Field", "Grid", "Space", "make_grid"]
__version__ = "0.1.0"
