"""Time integrators for the compressible system and its incompressible limit."""

from src.solvers.compressible import CompressibleSolver, CompressibleState, NumericsOptions, velocity_split
from src.solvers.incompressible import IncompressibleSolver, IncompressibleState

__all__ = [
    "CompressibleSolver",
    "CompressibleState",
    "IncompressibleSolver",
    "IncompressibleState",
    "NumericsOptions",
    "velocity_split",
]
