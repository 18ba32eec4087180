"""Spectral laboratory for Schrodinger equations with rough potentials."""

from .errors import BoundaryContamination, InvalidInput, NonContraction, SolverAbort
from .spectral import Field, Grid

__all__ = ["Field", "Grid", "InvalidInput", "BoundaryContamination", "SolverAbort", "NonContraction"]
__version__ = "0.1.0"
