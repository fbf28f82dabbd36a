"""Exact-exponential integration of the mode amplitude ODE.

    db/dt = (a/ε)·b + c(t),   a = conj(iλ)

with c piecewise linear between samples. Each interval is integrated exactly:

    b_{n+1} = e^{x} b_n + Δ[c_n(φ₁(x) − φ₂(x)) + c_{n+1}φ₂(x)],   x = aΔ/ε
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import solve_ivp

from src.errors import UnstableModeError

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-4


def phi1(x: np.ndarray) -> np.ndarray:
    """(eˣ − 1)/x, with its Taylor series near zero."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    exact = np.expm1(safe) / safe
    series = 1.0 + x / 2.0 + x**2 / 6.0 + x**3 / 24.0
    return np.where(small, series, exact)


def phi2(x: np.ndarray) -> np.ndarray:
    """(eˣ − 1 − x)/x²."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    exact = (np.expm1(safe) - safe) / safe**2
    series = 0.5 + x / 6.0 + x**2 / 24.0 + x**3 / 120.0
    return np.where(small, series, exact)


def _validate(lambda_eps: complex, epsilon: float, times: np.ndarray, samples: int) -> None:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if complex(lambda_eps).real > 0:
        raise UnstableModeError(f"Mode exponent {lambda_eps} has positive real part")
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a nonempty 1D array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if samples != times.size:
        raise ValueError(f"Forcing has {samples} samples for {times.size} times")


def duhamel_solve(b0: complex, lambda_eps: complex, c, epsilon: float, times) -> np.ndarray:
    """b(t) = b0·e^{a t/ε} + ∫₀ᵗ c(s)e^{a(t−s)/ε} ds on ``times`` (times[0] is the start)."""
    times = np.asarray(times, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=complex), times.shape)
    _validate(lambda_eps, epsilon, times, c.size)
    rate = np.conj(complex(lambda_eps)) / epsilon

    steps = np.diff(times)
    x = rate * steps
    growth = np.exp(x)
    p1 = phi1(x)
    p2 = phi2(x)

    result = np.empty(times.shape, dtype=complex)
    result[0] = b0
    for n, delta in enumerate(steps):
        result[n + 1] = growth[n] * result[n] + delta * (c[n] * (p1[n] - p2[n]) + c[n + 1] * p2[n])
    return result


def direct_mode_integration(
    b0: complex, lambda_eps: complex, c, epsilon: float, times, rtol: float = 1e-12, atol: float = 1e-14
) -> np.ndarray:
    """Reference solution of the same ODE by DOP853, restarted on every sample interval."""
    times = np.asarray(times, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=complex), times.shape)
    _validate(lambda_eps, epsilon, times, c.size)
    rate = np.conj(complex(lambda_eps)) / epsilon

    result = np.empty(times.shape, dtype=complex)
    result[0] = b0
    for n in range(times.size - 1):
        t0, t1 = times[n], times[n + 1]
        c0, c1 = c[n], c[n + 1]

        def rhs(t: float, y: np.ndarray, t0=t0, t1=t1, c0=c0, c1=c1) -> np.ndarray:
            forcing = c0 + (c1 - c0) * (t - t0) / (t1 - t0)
            return rate * y + forcing

        solution = solve_ivp(rhs, (t0, t1), [result[n]], method="DOP853", rtol=rtol, atol=atol)
        if not solution.success:
            raise RuntimeError(f"Direct integration failed on [{t0}, {t1}]: {solution.message}")
        result[n + 1] = solution.y[0, -1]
    return result
