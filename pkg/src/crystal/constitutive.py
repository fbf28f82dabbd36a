"""Pointwise constitutive laws: penalty, Ericksen stress, pressure."""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.crystal.params import ModelParams
from src.errors import NegativeDensityError
from src.fields.models import DirectorField, ScalarField, TensorField, VectorField
from src.fields.operators import jacobian, laplacian


def penalty_energy(d: np.ndarray, sigma0: float) -> np.ndarray:
    """F = (|d|² − 1)²/(4σ₀²) with the director on axis 0."""
    excess = np.sum(d * d, axis=0) - 1.0
    return excess**2 / (4.0 * sigma0**2)


def penalty_force(d: np.ndarray, sigma0: float) -> np.ndarray:
    """f = ∇_d F = (|d|² − 1)d/(2σ₀²)."""
    excess = np.sum(d * d, axis=0) - 1.0
    return excess * d / (2.0 * sigma0**2)


def penalty(d: DirectorField, sigma0: float) -> tuple[ScalarField, DirectorField]:
    """Ginzburg-Landau energy density and its gradient."""
    if sigma0 <= 0:
        raise ValueError(f"sigma0 must be positive, got {sigma0}")
    return (
        ScalarField(d.grid, penalty_energy(d.samples, sigma0)),
        DirectorField(d.grid, penalty_force(d.samples, sigma0)),
    )


def director_gradient_product(d: np.ndarray, grid, edge_order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """(∇d⊙∇d)_ij = Σ_c ∂_i d_c ∂_j d_c and the Jacobian it came from."""
    jac = jacobian(d, grid, edge_order)
    return np.einsum("ci...,cj...->ij...", jac, jac), jac


def ericksen_stress(d: DirectorField, lambda_: float = 1.0, sigma0: float = 0.2) -> TensorField:
    """λ·(∇d⊙∇d − (½|∇d|² + F)·I) with centred derivatives."""
    grid = d.grid
    product, _ = director_gradient_product(d.samples, grid)
    trace = np.einsum("ii...->...", product)
    isotropic = 0.5 * trace + penalty_energy(d.samples, sigma0)
    stress = product - np.eye(grid.dim).reshape((grid.dim, grid.dim) + (1,) * grid.dim) * isotropic
    return TensorField(grid, lambda_ * stress)


def ericksen_force_samples(d: np.ndarray, grid, lambda_: float, sigma0: float) -> np.ndarray:
    """Momentum force −λ·div(stress) written as −λ(∇d)ᵀ(Δd − f(d))."""
    jac = jacobian(d, grid)
    molecular = laplacian(d, grid, "neumann") - penalty_force(d, sigma0)
    return -lambda_ * np.einsum("ca...,c...->a...", jac, molecular)


def ericksen_force(d: DirectorField, lambda_: float, sigma0: float) -> VectorField:
    return VectorField(d.grid, ericksen_force_samples(d.samples, d.grid, lambda_, sigma0))


def _check_density(rho: np.ndarray) -> None:
    if np.any(rho < 0):
        raise NegativeDensityError(f"Density has negative samples (min {float(np.min(rho)):.3e})")


def pressure(
    rho: ScalarField, params: ModelParams, d: Optional[DirectorField] = None
) -> tuple[ScalarField, ScalarField]:
    """P = ρ^γ/ε² and π_ε = P − (λ/2)|∇d|² − λF(d) (π_ε = P when no director is given)."""
    _check_density(rho.samples)
    p = rho.samples**params.gamma / params.epsilon**2
    pi = p.copy()
    if d is not None:
        product, _ = director_gradient_product(d.samples, d.grid)
        gradient_squared = np.einsum("ii...->...", product)
        pi -= params.lambda_ * (0.5 * gradient_squared + penalty_energy(d.samples, params.sigma0))
    return ScalarField(rho.grid, p), ScalarField(rho.grid, pi)


def pressure_remainder(rho: np.ndarray, params: ModelParams) -> np.ndarray:
    """Nonlinear part of the pressure, (ρ^γ − 1 − γ(ρ − 1))/ε²."""
    return (rho**params.gamma - 1.0 - params.gamma * (rho - 1.0)) / params.epsilon**2


def density_fluctuation(rho: ScalarField, epsilon: float) -> ScalarField:
    """φ = (ρ − 1)/ε."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return ScalarField(rho.grid, (rho.samples - 1.0) / epsilon)


def internal_energy_density(rho: np.ndarray, gamma: float) -> np.ndarray:
    """ρ^γ − γρ + γ − 1; nonnegative by convexity and zero at ρ = 1."""
    return rho**gamma - gamma * rho + gamma - 1.0


def coercivity_constant(gamma: float, upper: float = 1.5, samples: int = 2001) -> float:
    """Largest c₀ with ρ^γ − γρ + γ − 1 ≥ c₀(ρ − 1)² on [0, upper], sampled."""
    rho = np.linspace(0.0, upper, samples)
    rho = rho[np.abs(rho - 1.0) > 1e-3]
    return float(np.min(internal_energy_density(rho, gamma) / (rho - 1.0) ** 2))
