"""Director update shared by both solvers: upwind transport, penalty relaxation, implicit diffusion."""

from __future__ import annotations

import math

import numpy as np

from src.crystal.constitutive import penalty_force
from src.crystal.params import ModelParams
from src.fields.grid import Grid
from src.solvers.matrices import dirichlet_helmholtz_factor, solve_components

ADVECTIVE_CFL = 0.4


def advective_limit(u: np.ndarray, grid: Grid) -> float:
    """Largest dt with dt·Σ_a max|u_a|/h_a ≤ 0.4."""
    rate = sum(float(np.max(np.abs(u[axis]))) / h for axis, h in enumerate(grid.spacing))
    return math.inf if rate == 0 else ADVECTIVE_CFL / rate


def penalty_limit(params: ModelParams) -> float:
    """Largest dt keeping the explicit penalty step a contraction towards the unit sphere."""
    return params.sigma0**2 / params.theta


def upwind_transport(d: np.ndarray, u: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    """d − dt·(u·∇)d with first-order upwinding; boundary nodes are left unchanged.

    For dt within the advective limit every interior value is a convex
    combination of its neighbours.
    """
    result = np.array(d, copy=True)
    change = np.zeros_like(d)
    for axis, h in enumerate(grid.spacing):
        ax = 1 + axis
        forward = (np.roll(d, -1, axis=ax) - d) / h
        backward = (d - np.roll(d, 1, axis=ax)) / h
        velocity = u[axis]
        change += np.maximum(velocity, 0.0) * backward + np.minimum(velocity, 0.0) * forward
    interior = grid.interior_mask
    result[:, interior] -= dt * change[:, interior]
    return result


def director_step(
    d: np.ndarray,
    u: np.ndarray,
    boundary: np.ndarray,
    grid: Grid,
    params: ModelParams,
    dt: float,
) -> np.ndarray:
    """Advance ∂_t d + u·∇d = θ(Δd − f(d)) by one step.

    Transport and f(d) are explicit, θΔd is implicit with d = ``boundary`` on the
    walls. Each stage preserves max|d| ≤ max(1, max|d⁰|).
    """
    transported = upwind_transport(d, u, grid, dt)
    relaxed = transported - dt * params.theta * penalty_force(transported, params.sigma0)
    rhs = np.where(grid.interior_mask, relaxed, boundary)
    factor = dirichlet_helmholtz_factor(grid, dt * params.theta)
    return solve_components(factor, rhs)
