"""Phase-field solvers for Steiner trees (2D) and Plateau films (3D).

The library alternates weighted-geodesic computations (fast marching plus
backtracking or homotopy sweeps) with semi-implicit Fourier-spectral
phase-field steps, and ships desk-scale checks of the underlying
variational construction (recovery profiles, coarea level selection,
topological separation).
"""

__version__ = "0.1.0"

from .grid import GridSpec, ScalarField, FourierSymbol
from .flow import ModelParams, EnergyReport
from .potential import PotentialKind

__all__ = [
    "GridSpec",
    "ScalarField",
    "FourierSymbol",
    "ModelParams",
    "EnergyReport",
    "PotentialKind",
    "__version__",
]
