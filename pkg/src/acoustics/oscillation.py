"""Oscillatory cross-term integrals and the equal-eigenvalue gradient identity."""

from __future__ import annotations

import numpy as np

from src.acoustics.duhamel import SERIES_THRESHOLD, phi1
from src.fields.grid import Grid
from src.fields.operators import divergence, gradient
from src.spectral.basis import NeumannMode


def _linear_weight(x: np.ndarray) -> np.ndarray:
    """ψ(x) = ∫₀¹ s·e^{xs} ds = (eˣ(x − 1) + 1)/x²."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    exact = (np.exp(safe) * (safe - 1.0) + 1.0) / safe**2
    series = 0.5 + x / 3.0 + x**2 / 8.0 + x**3 / 30.0
    return np.where(small, series, exact)


def oscillation_integral(bk, bl, dlambda: float, epsilon: float, T: float, times=None) -> complex:  # noqa: N803
    """∫₀ᵀ e^{iΔλ t/ε} b_k(t) b_l(t) dt with b_k·b_l piecewise linear (Filon rule).

    The oscillatory factor is integrated exactly on every interval, so accuracy
    does not degrade as ε shrinks. ``times`` defaults to an even grid on [0, T].
    """
    if dlambda == 0:
        raise ValueError(
            "dlambda = 0 is the equal-eigenvalue case; its cross term is a gradient "
            "(see gradient_pair_residual) and needs no oscillation integral"
        )
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    bk = np.asarray(bk, dtype=complex)
    bl = np.asarray(bl, dtype=complex)
    if bk.shape != bl.shape or bk.ndim != 1 or bk.size < 2:
        raise ValueError("bk and bl must be aligned 1D series with at least two samples")
    times = np.linspace(0.0, T, bk.size) if times is None else np.asarray(times, dtype=float)
    if times.shape != bk.shape:
        raise ValueError("times must align with the series")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    omega = dlambda / epsilon
    g = bk * bl
    steps = np.diff(times)
    x = 1j * omega * steps
    start_phase = np.exp(1j * omega * times[:-1])
    pieces = start_phase * steps * (g[:-1] * phi1(x) + (g[1:] - g[:-1]) * _linear_weight(x))
    return complex(np.sum(pieces))


def gradient_pair_residual(mode_k: NeumannMode, mode_l: NeumannMode, grid: Grid) -> float:
    """Relative residual of div(∇Φ_k⊗∇Φ_l + ∇Φ_l⊗∇Φ_k) = ∇(∇Φ_k·∇Φ_l) − λ²∇(Φ_kΦ_l).

    Requires equal eigenvalues; the right side is a gradient, so the cross term
    between the two modes is absorbed by the pressure. The residual is O(h²).
    """
    if abs(mode_k.lambda_squared - mode_l.lambda_squared) > 1e-10 * max(1.0, mode_k.lambda_squared):
        raise ValueError(f"Modes {mode_k.index} and {mode_l.index} do not share an eigenvalue")
    grad_k = mode_k.sample_gradient(grid)
    grad_l = mode_l.sample_gradient(grid)
    tensor = np.einsum("i...,j...->ij...", grad_k, grad_l)
    symmetric = tensor + np.swapaxes(tensor, 0, 1)
    lhs = np.stack([divergence(symmetric[:, j], grid) for j in range(grid.dim)])

    dot = np.sum(grad_k * grad_l, axis=0)
    product = mode_k.sample(grid) * mode_l.sample(grid)
    rhs = gradient(dot, grid) - mode_k.lambda_squared * gradient(product, grid)

    weights = grid.weights
    residual = np.sqrt(np.sum(np.sum((lhs - rhs) ** 2, axis=0) * weights))
    scale = np.sqrt(np.sum(np.sum(rhs**2, axis=0) * weights)) + np.sqrt(np.sum(np.sum(lhs**2, axis=0) * weights))
    return float(residual / scale) if scale > 0 else float(residual)
