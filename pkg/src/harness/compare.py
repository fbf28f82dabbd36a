"""Space-time norms of compressible trajectories against the incompressible limit."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import trapezoid

from src.acoustics.modes import ModeSampler, q_split
from src.errors import MisalignedTrajectoryError
from src.fields.models import VectorField
from src.fields.operators import dirichlet_energy, gradient
from src.solvers.runner import Trajectory
from src.spectral.basis import SpectralBasis

TIME_TOLERANCE = 1e-12


class NormTable(BaseModel):
    """Difference norms between a compressible run and the limit run.

    Density and Q₁ norms need only the compressible trajectory and are filled in
    when a density exponent and a basis are supplied.
    """

    u_L2L2: float  # noqa: N815
    d_L2H1: float  # noqa: N815
    grad_d_L4: float  # noqa: N815
    rho_Lgamma: Optional[float] = None  # noqa: N815
    rho_Lkappa: Optional[float] = None  # noqa: N815
    Q1u_L2L2: Optional[float] = None  # noqa: N815

    def value(self, name: str) -> Optional[float]:
        return getattr(self, name)


def check_alignment(comp: Trajectory, inc: Trajectory) -> None:
    """Raise MisalignedTrajectoryError unless both runs share grid and output times."""
    if comp.grid != inc.grid:
        raise MisalignedTrajectoryError(f"Grids differ: {comp.grid.shape} vs {inc.grid.shape}")
    if len(comp) != len(inc):
        raise MisalignedTrajectoryError(f"Snapshot counts differ: {len(comp)} vs {len(inc)}")
    if len(comp) == 0:
        raise MisalignedTrajectoryError("Trajectories are empty")
    if not np.allclose(comp.time_array, inc.time_array, rtol=0.0, atol=TIME_TOLERANCE):
        raise MisalignedTrajectoryError("Output times differ")


def _time_l2(times: np.ndarray, squares: list[float]) -> float:
    if times.size == 1:
        return math.sqrt(squares[0])
    return math.sqrt(max(float(trapezoid(squares, times)), 0.0))


def density_deviation(comp: Trajectory, exponent: float) -> float:
    """sup_t ‖ρ(t) − 1‖_{L^p} over the snapshots."""
    if not comp.rho:
        raise ValueError("Trajectory carries no density")
    weights = comp.grid.weights
    return max(float(np.sum(np.abs(rho - 1.0) ** exponent * weights)) ** (1.0 / exponent) for rho in comp.rho)


def gradient_l4(trajectory: Trajectory) -> float:
    """‖∇d‖ in L⁴ over space and time."""
    grid = trajectory.grid
    fourth = []
    for d in trajectory.d:
        squared = np.sum(gradient(d, grid) ** 2, axis=(0, 1))
        fourth.append(float(np.sum(squared**2 * grid.weights)))
    times = trajectory.time_array
    total = fourth[0] if times.size == 1 else float(trapezoid(fourth, times))
    return max(total, 0.0) ** 0.25


def q1_norm(trajectory: Trajectory, basis: SpectralBasis) -> float:
    """‖Q₁u‖ in L² over space and time."""
    sampler = ModeSampler(basis, trajectory.grid)
    squares = [q_split(VectorField(trajectory.grid, u), basis, sampler).q1_norm ** 2 for u in trajectory.u]
    return _time_l2(trajectory.time_array, squares)


def compare_to_limit(
    comp: Trajectory,
    inc: Trajectory,
    *,
    gamma: Optional[float] = None,
    basis: Optional[SpectralBasis] = None,
) -> NormTable:
    """Time-trapezoid quadrature of ‖u_ε − u‖_{L²}² and ‖d_ε − d‖_{H¹}²; also ‖∇d_ε‖_{L⁴}."""
    check_alignment(comp, inc)
    grid = comp.grid
    weights = grid.weights
    times = comp.time_array

    velocity, director = [], []
    for u_eps, u, d_eps, d in zip(comp.u, inc.u, comp.d, inc.d):
        velocity.append(float(np.sum(np.sum((u_eps - u) ** 2, axis=0) * weights)))
        difference = d_eps - d
        director.append(float(np.sum(np.sum(difference**2, axis=0) * weights)) + dirichlet_energy(difference, grid))

    table = NormTable(
        u_L2L2=_time_l2(times, velocity),
        d_L2H1=_time_l2(times, director),
        grad_d_L4=gradient_l4(comp),
    )
    if gamma is not None and comp.rho:
        table.rho_Lgamma = density_deviation(comp, gamma)
        table.rho_Lkappa = density_deviation(comp, min(2.0, gamma))
    if basis is not None:
        table.Q1u_L2L2 = q1_norm(comp, basis)
    return table
