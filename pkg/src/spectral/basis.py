"""Closed-form Neumann-Laplacian eigenbasis, wave eigenvectors and damping corrections."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from src.spectral.domain import Domain

if TYPE_CHECKING:
    from src.fields.grid import Grid

logger = logging.getLogger(__name__)

CLASS_TOLERANCE = 1e-12


class ModeClass(str, Enum):
    """Damping class of a mode: damped (I), undamped (J) or the constant mode."""

    I = "I"  # noqa: E741
    J = "J"
    TRIVIAL = "trivial"


def _validate_index(domain: Domain, index: Sequence[int]) -> tuple[int, ...]:
    index = tuple(int(value) for value in index)
    if len(index) != domain.dim:
        raise ValueError(f"Mode index {index} does not match a {domain.dim}D domain")
    if any(value < 0 for value in index):
        raise ValueError(f"Mode index components must be nonnegative, got {index}")
    return index


@dataclass(frozen=True)
class NeumannMode:
    """Normalized cosine product Φ = A·Π cos(k_a x_a) with k_a = index_a·π/L_a."""

    domain: Domain
    index: tuple[int, ...]

    @property
    def wavenumbers(self) -> tuple[float, ...]:
        return tuple(value * math.pi / length for value, length in zip(self.index, self.domain.extents))

    @property
    def lambda_squared(self) -> float:
        return sum(k * k for k in self.wavenumbers)

    @property
    def lambda0(self) -> float:
        return math.sqrt(self.lambda_squared)

    @property
    def is_constant(self) -> bool:
        return not any(self.index)

    @property
    def amplitude(self) -> float:
        """Normalization constant giving unit L² norm."""
        product = 1.0
        for value, length in zip(self.index, self.domain.extents):
            product *= (1.0 if value == 0 else 2.0) / length
        return math.sqrt(product)

    @property
    def m(self) -> int:
        return self.index[0]

    @property
    def n(self) -> int:
        return self.index[1] if len(self.index) > 1 else 0

    def evaluate_at(self, *coordinates: np.ndarray) -> np.ndarray:
        """Φ at arbitrary points (one coordinate array per axis, broadcastable)."""
        result = np.asarray(self.amplitude, dtype=float)
        for k, x in zip(self.wavenumbers, coordinates):
            result = result * np.cos(k * np.asarray(x, dtype=float))
        return result

    def gradient_at(self, *coordinates: np.ndarray) -> np.ndarray:
        """∇Φ at arbitrary points, stacked along a leading axis of length ``dim``."""
        coords = [np.asarray(x, dtype=float) for x in coordinates]
        shape = np.broadcast(*coords).shape if len(coords) > 1 else coords[0].shape
        components = []
        for axis, k in enumerate(self.wavenumbers):
            component = np.full(shape, self.amplitude)
            for other, (k_other, x) in enumerate(zip(self.wavenumbers, coords)):
                if other == axis:
                    component = component * (-k * np.sin(k * x))
                else:
                    component = component * np.cos(k_other * x)
            components.append(component)
        return np.stack(components)

    def sample(self, grid: "Grid") -> np.ndarray:
        """Φ at the grid nodes."""
        return self.evaluate_at(*grid.mesh)

    def sample_gradient(self, grid: "Grid") -> np.ndarray:
        """∇Φ at the grid nodes, shape ``(dim,) + grid.shape``."""
        return self.gradient_at(*grid.mesh)

    def boundary_integral(self) -> float:
        """∫ over the boundary of |∇Φ|² ds, evaluated analytically.

        On a rectangle only the tangential derivative survives on each edge and
        ∫ sin² over an edge is half its length; on a slab ∇Φ vanishes at both ends.
        """
        if self.domain.is_slab or self.is_constant:
            return 0.0
        m, n = self.index
        Lx, Ly = self.domain.extents
        total = 0.0
        if m >= 1:
            total += (m * math.pi / Lx) ** 2 * Lx
        if n >= 1:
            total += (n * math.pi / Ly) ** 2 * Ly
        return self.amplitude**2 * total

    def boundary_points(self, samples_per_edge: int = 257) -> tuple[np.ndarray, ...]:
        """Points along the boundary: the two endpoints of a slab or the four rectangle edges."""
        if self.domain.is_slab:
            return (np.array([0.0, self.domain.Lx]),)
        Lx, Ly = self.domain.extents
        s = np.linspace(0.0, 1.0, samples_per_edge)
        xs = np.concatenate([s * Lx, s * Lx, np.zeros_like(s), np.full_like(s, Lx)])
        ys = np.concatenate([np.zeros_like(s), np.full_like(s, Ly), s * Ly, s * Ly])
        return xs, ys

    def boundary_trace(self, samples_per_edge: int = 257) -> np.ndarray:
        return self.evaluate_at(*self.boundary_points(samples_per_edge))

    def label(self) -> str:
        return "(" + ",".join(str(value) for value in self.index) + ")"


def eigenpair(domain: Domain, index: Sequence[int]) -> NeumannMode:
    """Return the closed-form Neumann mode with the given multi-index."""
    return NeumannMode(domain=domain, index=_validate_index(domain, index))


@dataclass(frozen=True)
class WaveEigenvector:
    """Eigenvector (Φ, ±∇Φ/(iλ)) of the unit-speed wave operator."""

    mode: NeumannMode
    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def eigenvalue(self) -> complex:
        """±iλ."""
        return 1j * self.sign * self.mode.lambda0

    def scalar_part(self, grid: "Grid") -> np.ndarray:
        return self.mode.sample(grid).astype(complex)

    def vector_part(self, grid: "Grid") -> np.ndarray:
        """±∇Φ/(iλ); zero for the constant mode."""
        gradient = self.mode.sample_gradient(grid)
        if self.mode.is_constant:
            return np.zeros(gradient.shape, dtype=complex)
        return self.sign * gradient / (1j * self.mode.lambda0)


@dataclass(frozen=True)
class DampingCorrection:
    """First-order eigenvalue correction iλ₁^± of a mode."""

    value_plus: complex
    value_minus: complex
    boundary_integral: float
    mode_class: ModeClass

    @property
    def value(self) -> complex:
        return self.value_plus

    def for_sign(self, sign: int) -> complex:
        return self.value_plus if sign > 0 else self.value_minus

    @property
    def real_part(self) -> float:
        return self.value_plus.real


def damping_correction(mode: NeumannMode, mu: float) -> DampingCorrection:
    """iλ₁^± = −((1 ± i)/2)·√(μ/(2λ³))·∫|∇Φ|² ds for a normalized mode."""
    if mu < 0:
        raise ValueError(f"Viscosity must be nonnegative, got {mu}")
    if mode.is_constant:
        return DampingCorrection(0j, 0j, 0.0, ModeClass.TRIVIAL)

    integral = mode.boundary_integral()
    lam = mode.lambda0
    if integral <= CLASS_TOLERANCE * max(1.0, mode.lambda_squared):
        return DampingCorrection(0j, 0j, integral, ModeClass.J)

    scale = math.sqrt(mu / (2.0 * lam**3)) * integral
    return DampingCorrection(
        value_plus=-0.5 * (1 + 1j) * scale,
        value_minus=-0.5 * (1 - 1j) * scale,
        boundary_integral=integral,
        mode_class=ModeClass.I,
    )


def approximate_eigenvalue(
    mode: NeumannMode,
    correction: DampingCorrection,
    sign: int,
    epsilon: float,
    mu: float,
    include_bulk: bool = True,
) -> complex:
    """±iλ + iλ₁^±·√ε, optionally with the interior viscous term −ε·μλ²/2."""
    value = 1j * sign * mode.lambda0 + correction.for_sign(sign) * math.sqrt(epsilon)
    if include_bulk:
        value -= epsilon * mu * mode.lambda_squared / 2.0
    return value


def _enumerate_indices(domain: Domain, count: int) -> list[tuple[int, ...]]:
    if domain.is_slab:
        return [(m,) for m in range(1, count + 1)]
    Lx, Ly = domain.extents
    # The count-th lowest nonconstant mode has λ <= count·π/Lx, which bounds both indices.
    n_max = int(math.ceil(count * Ly / Lx))
    candidates = [(m, n) for m in range(count + 1) for n in range(n_max + 1) if (m, n) != (0, 0)]

    def key(index: tuple[int, int]) -> tuple[float, int, int]:
        m, n = index
        return (round((m * math.pi / Lx) ** 2 + (n * math.pi / Ly) ** 2, 10), n, m)

    return sorted(candidates, key=key)[:count]


@dataclass(frozen=True)
class SpectralBasis:
    """The constant mode followed by the ``truncation`` lowest nonconstant modes.

    ``next_lambda_squared`` is the first eigenvalue beyond the truncation, used for
    tail bounds.
    """

    domain: Domain
    modes: tuple[NeumannMode, ...]
    corrections: tuple[DampingCorrection, ...]
    truncation: int
    mu: float
    next_lambda_squared: float = field(default=math.inf)

    def __iter__(self) -> Iterator[tuple[NeumannMode, DampingCorrection]]:
        return iter(zip(self.modes, self.corrections))

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def nonconstant(self) -> list[tuple[NeumannMode, DampingCorrection]]:
        return [(mode, correction) for mode, correction in self if not mode.is_constant]

    def in_class(self, mode_class: ModeClass) -> list[NeumannMode]:
        return [mode for mode, correction in self if correction.mode_class == mode_class]

    def find(self, index: Sequence[int]) -> tuple[NeumannMode, DampingCorrection]:
        target = tuple(index)
        for mode, correction in self:
            if mode.index == target:
                return mode, correction
        raise KeyError(f"Mode {target} is not part of the basis")

    def gram_matrix(self, grid: "Grid") -> np.ndarray:
        """Discrete (trapezoid) Gram matrix of the sampled modes."""
        samples = np.stack([mode.sample(grid) for mode in self.modes])
        weighted = samples * grid.weights
        flat = samples.reshape(len(self.modes), -1)
        return weighted.reshape(len(self.modes), -1) @ flat.T

    def max_wavenumber_index(self) -> tuple[int, ...]:
        return tuple(max(mode.index[axis] for mode in self.modes) for axis in range(self.domain.dim))

    def to_rows(self) -> list[dict]:
        """Rows for the basis CSV."""
        rows = []
        for mode, correction in self:
            rows.append(
                {
                    "m": mode.m,
                    "n": mode.n,
                    "lambda0": mode.lambda0,
                    "boundary_integral": correction.boundary_integral,
                    "re_lambda1": correction.value.real,
                    "im_lambda1": correction.value.imag,
                    "class": correction.mode_class.value,
                }
            )
        return rows


def build_basis(domain: Domain, N: int, mu: float = 1.0) -> SpectralBasis:  # noqa: N803
    """Constant mode plus the N lowest nonconstant modes, ordered by (λ², n, m)."""
    if N < 1:
        raise ValueError(f"Basis truncation must be at least 1, got {N}")
    indices = _enumerate_indices(domain, N + 1)
    modes = [eigenpair(domain, (0,) * domain.dim)] + [eigenpair(domain, index) for index in indices[:N]]
    next_mode = eigenpair(domain, indices[N])
    corrections = [damping_correction(mode, mu) for mode in modes]
    logger.debug("Built %d-mode basis on %s, largest λ = %.4f", N, domain.kind.value, modes[-1].lambda0)
    return SpectralBasis(
        domain=domain,
        modes=tuple(modes),
        corrections=tuple(corrections),
        truncation=N,
        mu=mu,
        next_lambda_squared=next_mode.lambda_squared,
    )
