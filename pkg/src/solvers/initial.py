"""Initial data profiles.

u⁰ and d⁰ never depend on ε; the density is ρ⁰ = 1 + ε·ϕ⁰ with a fixed smooth
zero-mean ϕ⁰, so every member of an ε sweep starts from comparable data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.crystal.params import ModelParams
from src.errors import ConfigError
from src.fields.grid import Grid
from src.fields.transforms import get_transform
from src.spectral.basis import eigenpair

logger = logging.getLogger(__name__)

RANDOM_MODES = 4


@dataclass(frozen=True)
class InitialData:
    """Sampled (ϕ⁰, u⁰, d⁰); the density is assembled per ε."""

    phi: np.ndarray
    u: np.ndarray
    d: np.ndarray

    def density(self, epsilon: float) -> np.ndarray:
        return 1.0 + epsilon * self.phi


def _bump(grid: Grid) -> tuple[np.ndarray, list[np.ndarray]]:
    """χ = Π sin²(πx_a/L_a) and its gradient; χ and ∇χ vanish on the walls."""
    values = np.ones(grid.shape)
    factors = []
    for x, length in zip(grid.mesh, grid.domain.extents):
        s = np.sin(math.pi * x / length)
        factors.append((s**2, 2.0 * s * np.cos(math.pi * x / length) * math.pi / length))
        values = values * s**2
    gradient = []
    for axis in range(grid.dim):
        component = np.ones(grid.shape)
        for other, (value, derivative) in enumerate(factors):
            component = component * (derivative if other == axis else value)
        gradient.append(component)
    return values, gradient


def _vortex_velocity(grid: Grid, amplitude: float, gradient_fraction: float) -> np.ndarray:
    """amplitude·(curl χ + g·∇χ): a no-slip vortex plus an ill-prepared gradient part."""
    _, grad = _bump(grid)
    if grid.dim == 1:
        return amplitude * gradient_fraction * np.stack(grad)
    solenoidal = np.stack([grad[1], -grad[0]])
    return amplitude * (solenoidal + gradient_fraction * np.stack(grad))


def _tilted_director(grid: Grid) -> np.ndarray:
    """Unit director (sin α, 0, cos α) with α = (π/8)·Σ_a cos(πx_a/L_a)."""
    angle = np.zeros(grid.shape)
    for x, length in zip(grid.mesh, grid.domain.extents):
        angle = angle + math.pi / 8.0 * np.cos(math.pi * x / length)
    if grid.dim == 1:
        angle = 2.0 * angle
    return np.stack([np.sin(angle), np.zeros(grid.shape), np.cos(angle)])


def _aligned_director(grid: Grid) -> np.ndarray:
    return np.stack([np.zeros(grid.shape), np.zeros(grid.shape), np.ones(grid.shape)])


def _fluctuation_profile(grid: Grid) -> np.ndarray:
    """Lowest mode with oscillation along every axis, normalized."""
    return eigenpair(grid.domain, (1,) * grid.dim).sample(grid)


def _random_velocity(grid: Grid, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    transform = get_transform(grid)
    parts = []
    for _ in range(grid.dim):
        coefficients = np.zeros(transform.eigenvalues.shape)
        window = tuple(slice(1, RANDOM_MODES + 1) for _ in range(grid.dim))
        coefficients[window] = rng.standard_normal(coefficients[window].shape)
        # Sines along every axis vanish on all walls.
        result = coefficients
        for axis in range(grid.dim):
            result = np.moveaxis(np.tensordot(transform.sin[axis], result, axes=([1], [axis])), 0, axis)
        parts.append(result)
    velocity = np.stack(parts)
    peak = float(np.max(np.abs(velocity)))
    return amplitude * velocity / peak if peak > 0 else velocity


def _random_fluctuation(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    transform = get_transform(grid)
    coefficients = np.zeros(transform.eigenvalues.shape)
    window = tuple(slice(0, RANDOM_MODES + 1) for _ in range(grid.dim))
    coefficients[window] = rng.standard_normal(coefficients[window].shape)
    coefficients.flat[0] = 0.0
    return transform.synthesise(coefficients)


def build_initial_data(
    grid: Grid,
    profile: str,
    amplitude: float = 0.5,
    gradient_fraction: float = 0.5,
    seed: int = 0,
) -> InitialData:
    """Sample one of the named initial profiles."""
    zeros = np.zeros((grid.dim,) + grid.shape)
    if profile == "equilibrium":
        return InitialData(np.zeros(grid.shape), zeros, _aligned_director(grid))
    if profile == "vortex":
        velocity = _vortex_velocity(grid, amplitude, gradient_fraction)
        return InitialData(_fluctuation_profile(grid), velocity, _tilted_director(grid))
    if profile == "acoustic":
        mode = eigenpair(grid.domain, (1,) + (0,) * (grid.dim - 1))
        return InitialData(amplitude * mode.sample(grid), zeros, _aligned_director(grid))
    if profile == "director":
        return InitialData(np.zeros(grid.shape), zeros, _tilted_director(grid))
    if profile == "random":
        rng = np.random.default_rng(seed)
        velocity = _random_velocity(grid, amplitude, rng)
        return InitialData(_random_fluctuation(grid, rng), velocity, _tilted_director(grid))
    raise ConfigError(f"Unknown initial profile: {profile}")


def initial_data_from_settings(settings, grid: Grid) -> InitialData:
    init = settings.init
    logger.debug("Building %s initial data on %s", init.profile, grid.shape)
    return build_initial_data(grid, init.profile, init.amplitude, init.gradient_fraction, init.seed)


def check_initial_density(data: InitialData, params: ModelParams) -> None:
    """Reject data whose density 1 + εϕ⁰ is not positive."""
    rho = data.density(params.epsilon)
    if np.min(rho) <= 0:
        raise ConfigError(f"Initial density is not positive for epsilon={params.epsilon}")
