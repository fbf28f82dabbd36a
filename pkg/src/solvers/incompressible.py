"""Projection solver for the incompressible limit system."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.crystal.constitutive import director_gradient_product, ericksen_force_samples, penalty_energy
from src.crystal.params import ModelParams
from src.errors import CFLViolationError
from src.fields.grid import Grid
from src.fields.models import DirectorField, ScalarField, VectorField
from src.fields.operators import fourth_difference_filter, gradient
from src.fields.transforms import leray_project
from src.solvers.compressible import NumericsOptions
from src.solvers.director import advective_limit, director_step, penalty_limit
from src.solvers.matrices import dirichlet_helmholtz_factor, solenoidal_projection, solve_components

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IncompressibleState:
    """(u, d, π) at time t with π of zero mean."""

    t: float
    u: VectorField
    d: DirectorField
    pi: ScalarField
    params: ModelParams
    boundary: DirectorField

    @property
    def grid(self) -> Grid:
        return self.u.grid


def _convection(u: np.ndarray, grid: Grid) -> np.ndarray:
    """(u·∇)u with centred differences."""
    jac = gradient(u, grid)
    return np.einsum("a...,ja...->j...", u, jac)


class IncompressibleSolver:
    """Chorin projection stepper: predictor with implicit viscosity, then u ← P u*.

    P is the discrete projection onto stream-function velocities, so u vanishes on
    the walls and its finite-difference divergence is zero to round-off. π comes
    from the potential of the continuous Leray split of u*.
    """

    def __init__(self, grid: Grid, params: ModelParams, numerics: Optional[NumericsOptions] = None):
        self.grid = grid
        self.params = params
        self.numerics = numerics or NumericsOptions()

    def step(self, state: IncompressibleState, dt: float) -> IncompressibleState:
        if dt <= 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        grid = self.grid
        params = self.params
        u = state.u.samples
        d = state.d.samples
        limit = min(advective_limit(u, grid), penalty_limit(params))
        if dt > limit:
            raise CFLViolationError(dt, limit)

        d_next = director_step(d, u, state.boundary.samples, grid, params, dt)

        # The isotropic part of the Ericksen stress is a gradient and ends up in π.
        force = ericksen_force_samples(d, grid, params.lambda_, params.sigma0)
        rhs = np.where(grid.interior_mask, u + dt * (force - _convection(u, grid)), 0.0)
        u_star = solve_components(dirichlet_helmholtz_factor(grid, dt * params.mu), rhs)
        u_star = fourth_difference_filter(u_star, grid, self.numerics.filter)

        projected = solenoidal_projection(u_star, grid)
        _, _, potential = leray_project(VectorField(grid, u_star), return_potential=True)
        product, _ = director_gradient_product(d, grid)
        isotropic = 0.5 * np.einsum("ii...->...", product) + penalty_energy(d, params.sigma0)
        pi = potential.samples / dt - params.lambda_ * isotropic
        pi = pi - grid.mean(pi)

        return replace(
            state,
            t=state.t + dt,
            u=VectorField(grid, projected),
            d=DirectorField(grid, d_next),
            pi=ScalarField(grid, pi),
        )


def step(
    state: IncompressibleState, dt: float, params: Optional[ModelParams] = None, numerics: Optional[NumericsOptions] = None
) -> IncompressibleState:
    """Advance an incompressible state by one time step."""
    return IncompressibleSolver(state.grid, params or state.params, numerics).step(state, dt)


def initial_state(
    u0: np.ndarray, d0: np.ndarray, grid: Grid, params: ModelParams, t: float = 0.0
) -> IncompressibleState:
    """State with the projected initial velocity P u₀ and zero pressure."""
    director = DirectorField(grid, d0)
    return IncompressibleState(
        t=t,
        u=VectorField(grid, solenoidal_projection(np.asarray(u0, dtype=float), grid)),
        d=director,
        pi=ScalarField.zeros(grid),
        params=params,
        boundary=director,
    )
