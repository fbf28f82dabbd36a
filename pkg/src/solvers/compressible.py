"""Semi-implicit solver for the scaled compressible nematic system.

One step advances the director, then a momentum predictor with implicit
viscosity, then an implicit acoustic correction for the density increment. The
acoustic solve uses the compact Neumann Laplacian for the pressure flux so that
the mass update is conservative and free of checkerboard modes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from src.crystal.constitutive import density_fluctuation, ericksen_force_samples, pressure
from src.crystal.params import ModelParams
from src.errors import CFLViolationError, NegativeDensityError
from src.fields.grid import Grid
from src.fields.models import DirectorField, ScalarField, VectorField
from src.fields.operators import derivative, divergence, fourth_difference_filter
from src.solvers.director import advective_limit, director_step, penalty_limit
from src.solvers.matrices import laplacian_matrix, weighted_dirichlet_solve

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10
SPLIT_THRESHOLD = 0.5


@dataclass(frozen=True)
class NumericsOptions:
    """Discretization knobs that are not physical parameters."""

    acoustic_theta: float = 1.0
    filter: float = 0.05

    @classmethod
    def from_settings(cls, settings) -> "NumericsOptions":
        return cls(acoustic_theta=settings.time.acoustic_theta, filter=settings.time.filter)


@dataclass(frozen=True)
class CompressibleState:
    """(ρ, u, d) at time t; ``boundary`` holds the prescribed director wall values."""

    t: float
    rho: ScalarField
    u: VectorField
    d: DirectorField
    params: ModelParams
    boundary: DirectorField

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    @property
    def momentum(self) -> VectorField:
        return VectorField(self.grid, self.rho.samples * self.u.samples)

    @property
    def fluctuation(self) -> ScalarField:
        return density_fluctuation(self.rho, self.params.epsilon)

    @property
    def pi_eps(self) -> ScalarField:
        return pressure(self.rho, self.params, self.d)[1]

    def mass(self) -> float:
        return float(self.grid.integrate(self.rho.samples))


def time_step_limit(state: CompressibleState) -> float:
    """Advective and penalty limits; the acoustic part is implicit and unconstrained."""
    return min(advective_limit(state.u.samples, state.grid), penalty_limit(state.params))


def _conservative_convection(rho: np.ndarray, u: np.ndarray, grid: Grid) -> np.ndarray:
    """div(ρu⊗u) with the conservative first derivative."""
    flux = rho * u
    return np.stack([divergence(flux * u[j], grid, edge_order=1) for j in range(grid.dim)])


def _pressure_gradient(p: np.ndarray, grid: Grid) -> np.ndarray:
    return np.stack([derivative(p, grid, axis, edge_order=1) for axis in range(grid.dim)])


class CompressibleSolver:
    """Time stepper for one grid and parameter set."""

    def __init__(self, grid: Grid, params: ModelParams, numerics: Optional[NumericsOptions] = None):
        self.grid = grid
        self.params = params
        self.numerics = numerics or NumericsOptions()
        self.neumann_laplacian = laplacian_matrix(grid, "neumann")

    def step(self, state: CompressibleState, dt: float) -> CompressibleState:
        """Advance by dt, retrying as two half steps while the density turns negative."""
        if dt <= 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        limit = time_step_limit(state)
        if dt > limit:
            raise CFLViolationError(dt, limit)
        return self._step_with_retry(state, dt, depth=0)

    def _step_with_retry(self, state: CompressibleState, dt: float, depth: int) -> CompressibleState:
        advanced = self._attempt(state, dt)
        if advanced is not None:
            return advanced
        if depth >= MAX_HALVINGS:
            raise NegativeDensityError(
                f"Density stayed negative after {MAX_HALVINGS} time-step halvings", time=state.t
            )
        logger.warning("Negative density at t=%.6f with dt=%.3e; retrying with dt/2", state.t, dt)
        half = self._step_with_retry(state, dt / 2.0, depth + 1)
        return self._step_with_retry(half, dt / 2.0, depth + 1)

    def _attempt(self, state: CompressibleState, dt: float) -> Optional[CompressibleState]:
        grid = self.grid
        params = self.params
        rho = state.rho.samples
        u = state.u.samples
        d = state.d.samples
        interior = grid.interior_mask

        d_next = director_step(d, u, state.boundary.samples, grid, params, dt)

        # Momentum predictor: explicit convection and Ericksen force, implicit viscosity.
        force = ericksen_force_samples(d, grid, params.lambda_, params.sigma0)
        rhs = rho * u - dt * _conservative_convection(rho, u, grid) + dt * force
        rhs = np.where(interior, rhs, 0.0)
        u_star = weighted_dirichlet_solve(grid, rho, dt * params.mu, rhs)
        u_star = fourth_difference_filter(u_star, grid, self.numerics.filter)
        m_star = np.where(interior, rho * u_star, 0.0)
        m_old = np.where(interior, rho * u, 0.0)

        # Acoustic correction for the density increment.
        theta = self.numerics.acoustic_theta
        eps2 = params.epsilon**2
        p_old = (rho**params.gamma - 1.0) / eps2
        c2 = params.gamma * np.maximum(rho, 0.0) ** (params.gamma - 1.0)
        flux_div = theta * divergence(m_star, grid, edge_order=1) + (1.0 - theta) * divergence(m_old, grid, edge_order=1)
        lap_p = (self.neumann_laplacian @ p_old.ravel()).reshape(grid.shape)
        rhs_rho = -dt * flux_div + theta * dt**2 * lap_p
        matrix = sparse.identity(grid.size, format="csc") - (theta**2 * dt**2 / eps2) * (
            self.neumann_laplacian @ sparse.diags(c2.ravel())
        )
        delta = splu(matrix.tocsc()).solve(rhs_rho.ravel()).reshape(grid.shape)

        rho_next = rho + delta
        if np.min(rho_next) <= 0.0 or not np.all(np.isfinite(rho_next)):
            return None

        p_theta = p_old + theta * c2 * delta / eps2
        m_next = np.where(interior, m_star - dt * _pressure_gradient(p_theta, grid), 0.0)
        u_next = m_next / rho_next

        return replace(
            state,
            t=state.t + dt,
            rho=ScalarField(grid, rho_next),
            u=VectorField(grid, u_next),
            d=DirectorField(grid, d_next),
        )


def step(state: CompressibleState, dt: float, numerics: Optional[NumericsOptions] = None) -> CompressibleState:
    """Advance a compressible state by one time step."""
    return CompressibleSolver(state.grid, state.params, numerics).step(state, dt)


def velocity_split(
    state: CompressibleState, threshold: float = SPLIT_THRESHOLD
) -> tuple[VectorField, VectorField, float, float]:
    """u¹ = u on {|ρ − 1| ≤ threshold}, u² = u elsewhere, plus ‖u¹‖² and ‖u²‖²."""
    near = np.abs(state.rho.samples - 1.0) <= threshold
    u = state.u.samples
    u1 = np.where(near, u, 0.0)
    u2 = np.where(near, 0.0, u)
    weights = state.grid.weights
    mass1 = float(np.sum(np.sum(u1**2, axis=0) * weights))
    mass2 = float(np.sum(np.sum(u2**2, axis=0) * weights))
    return VectorField(state.grid, u1), VectorField(state.grid, u2), mass1, mass2


def mode_trace_stride(dt: float, largest_lambda: float, params: ModelParams, samples_per_period: int) -> int:
    """Steps between mode samples: ``samples_per_period`` per shortest acoustic period."""
    if largest_lambda <= 0:
        return 1
    period = 2.0 * math.pi * params.epsilon / (params.sound_speed * largest_lambda)
    return max(1, int(period / (samples_per_period * dt)))
