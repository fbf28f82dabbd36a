"""Cosine-spectral Poisson solves and the discrete Leray/Helmholtz projection.

Scalars are expanded in sampled cosine products cos(k_x x)·cos(k_y y). The x
component of a gradient lives on sin(k_x x)·cos(k_y y), the y component on
cos(k_x x)·sin(k_y y). Both families are exactly orthogonal under trapezoid
weights on node grids.

Cosine gradients have zero normal trace, so on their own they cannot carry the
flux v·ν of a general field. The projection therefore also spans the gradients
of boundary lifts q_s(x_a)·Π cos(k_t x_t), with q_0'(0) = 1, q_0'(L) = 0 and
q_1'(0) = 0, q_1'(L) = 1. Together the two families reach every sampled
gradient with a cosine-expandable normal trace, and the projection onto their
span is exactly orthogonal in the discrete L² inner product.
"""

from __future__ import annotations

import logging
import math
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import fft
from scipy.linalg import cho_factor, cho_solve

from src.errors import CompatibilityDefect
from src.fields.grid import Grid
from src.fields.models import ScalarField, VectorField

logger = logging.getLogger(__name__)

COMPATIBILITY_TOLERANCE = 1e-10
NULL_MODE_TOLERANCE = 1e-12
LIFT_BATCH = 64


def _contract(array: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Apply one (out, in) matrix per grid axis; grid axes are the trailing ones."""
    offset = array.ndim - len(matrices)
    result = np.asarray(array)
    for axis, matrix in enumerate(matrices):
        result = np.moveaxis(np.tensordot(matrix, result, axes=([1], [offset + axis])), 0, offset + axis)
    return result


class CosineTransform:
    """Discrete cosine/sine analysis on one grid (cache instances with ``get_transform``).

    Sample arrays may carry leading batch axes; the grid axes come last. Vector
    samples keep their component axis just before the grid axes.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.wavenumbers: list[np.ndarray] = []
        self.cos: list[np.ndarray] = []
        self.sin: list[np.ndarray] = []
        self.cos_norms: list[np.ndarray] = []
        self.sin_norms: list[np.ndarray] = []
        self.profiles: list[np.ndarray] = []
        self.slopes: list[np.ndarray] = []
        for cells, length, weights, x in zip(grid.cells, grid.domain.extents, grid.axis_weights, grid.axes):
            nodes = np.arange(cells + 1)
            phase = np.pi * np.outer(nodes, nodes) / cells
            cos = np.cos(phase)
            sin = np.sin(phase)
            sin[:, 0] = 0.0
            sin[:, -1] = 0.0
            sin[0, :] = 0.0
            sin[-1, :] = 0.0
            self.cos.append(cos)
            self.sin.append(sin)
            self.cos_norms.append(weights @ cos**2)
            self.sin_norms.append(weights @ sin**2)
            self.wavenumbers.append(nodes * math.pi / length)
            self.profiles.append(np.stack([-((length - x) ** 2) / (2.0 * length), x**2 / (2.0 * length)], axis=1))
            self.slopes.append(np.stack([(length - x) / length, x / length], axis=1))

        mesh = np.meshgrid(*self.wavenumbers, indexing="ij")
        self.eigenvalues = sum(k**2 for k in mesh)

    def _broadcast(self, values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.grid.dim
        shape[axis] = -1
        return values.reshape(shape)

    # Scalar expansions -----------------------------------------------------

    def analyse(self, samples: np.ndarray, sine_axis: Optional[int] = None) -> np.ndarray:
        """Coefficients against cosine products (sine along ``sine_axis``)."""
        matrices = []
        for axis, weights in enumerate(self.grid.axis_weights):
            basis = self.sin[axis] if axis == sine_axis else self.cos[axis]
            matrices.append((basis * weights[:, None]).T)
        return _contract(samples, matrices)

    def synthesise(self, coefficients: np.ndarray, sine_axis: Optional[int] = None) -> np.ndarray:
        matrices = [self.sin[axis] if axis == sine_axis else self.cos[axis] for axis in range(self.grid.dim)]
        return _contract(coefficients, matrices)

    def _norms(self, sine_axis: Optional[int] = None) -> np.ndarray:
        norms = np.ones(1)
        for axis in range(self.grid.dim):
            values = self.sin_norms[axis] if axis == sine_axis else self.cos_norms[axis]
            norms = np.multiply.outer(norms, values)
        return norms[0]

    def cosine_coefficients(self, samples: np.ndarray) -> np.ndarray:
        """Coefficients a with samples = Σ a_k cos-products (exact on node grids)."""
        return self.analyse(samples) / self._norms()

    def spectral_laplacian(self, samples: np.ndarray) -> np.ndarray:
        """Δ applied mode by mode through the type-I DCT."""
        axes = tuple(range(samples.ndim - self.grid.dim, samples.ndim))
        return fft.idctn(-self.eigenvalues * fft.dctn(samples, type=1, axes=axes), type=1, axes=axes)

    # Gradient expansions ---------------------------------------------------

    def gradient_norms(self) -> np.ndarray:
        """Discrete ‖∇(Π cos)‖² per multi-index (unnormalized cosine products)."""
        total = np.zeros(self.eigenvalues.shape)
        for axis in range(self.grid.dim):
            total = total + self._broadcast(self.wavenumbers[axis] ** 2, axis) * self._norms(sine_axis=axis)
        return total

    def _component(self, vector_samples: np.ndarray, axis: int) -> np.ndarray:
        return np.take(vector_samples, axis, axis=vector_samples.ndim - self.grid.dim - 1)

    def gradient_coefficients(self, vector_samples: np.ndarray) -> np.ndarray:
        """c_k = ⟨v, ∇Φ_k⟩/‖∇Φ_k‖² for unnormalized cosine products Φ_k."""
        inner = 0.0
        for axis in range(self.grid.dim):
            k = self._broadcast(self.wavenumbers[axis], axis)
            inner = inner - k * self.analyse(self._component(vector_samples, axis), sine_axis=axis)
        norms = self.gradient_norms()
        valid = norms > NULL_MODE_TOLERANCE * np.max(norms)
        return np.where(valid, inner / np.where(valid, norms, 1.0), 0.0)

    def gradient_synthesis(self, coefficients: np.ndarray) -> np.ndarray:
        """Σ c_k ∇Φ_k sampled at the nodes."""
        parts = []
        for axis in range(self.grid.dim):
            k = self._broadcast(self.wavenumbers[axis], axis)
            parts.append(self.synthesise(-k * coefficients, sine_axis=axis))
        return np.stack(parts, axis=coefficients.ndim - self.grid.dim)

    def cosine_projection(self, vector_samples: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the span of the cosine-mode gradients."""
        return self.gradient_synthesis(self.gradient_coefficients(vector_samples))

    # Boundary lifts --------------------------------------------------------

    @property
    def lift_shapes(self) -> list[tuple[int, ...]]:
        """Coefficient shape per wall axis: two sides times the tangential cosines."""
        shapes = []
        for axis in range(self.grid.dim):
            shape = list(self.grid.shape)
            shape[axis] = 2
            shapes.append(tuple(shape))
        return shapes

    @property
    def lift_count(self) -> int:
        return sum(math.prod(shape) for shape in self.lift_shapes)

    def _split(self, coefficients: np.ndarray) -> list[np.ndarray]:
        batch = coefficients.shape[:-1]
        parts, start = [], 0
        for shape in self.lift_shapes:
            size = math.prod(shape)
            parts.append(coefficients[..., start : start + size].reshape(batch + shape))
            start += size
        return parts

    def _lift_matrices(self, wall: int, component: int, weighted: bool) -> list[np.ndarray]:
        """Per-axis factors of component ``component`` of the lifts on ``wall`` axis walls.

        Synthesis factors are (nodes, coefficients); ``weighted`` returns the
        transposed factors with trapezoid weights for inner products.
        """
        matrices = []
        for axis, weights in enumerate(self.grid.axis_weights):
            if axis == wall:
                factor = self.slopes[axis] if component == wall else self.profiles[axis]
            elif axis == component:
                factor = self.sin[axis] * -self.wavenumbers[axis][None, :]
            else:
                factor = self.cos[axis]
            matrices.append((factor * weights[:, None]).T if weighted else factor)
        return matrices

    def lift_inner(self, vector_samples: np.ndarray) -> np.ndarray:
        """⟨v, ∇ℓ_j⟩ for every lift, flattened along the last axis."""
        parts = []
        for wall in range(self.grid.dim):
            total = 0.0
            for component in range(self.grid.dim):
                values = self._component(vector_samples, component)
                total = total + _contract(values, self._lift_matrices(wall, component, weighted=True))
            batch = np.shape(total)[: np.ndim(total) - self.grid.dim]
            parts.append(np.reshape(total, batch + (-1,)))
        return np.concatenate(parts, axis=-1)

    def lift_gradient(self, coefficients: np.ndarray) -> np.ndarray:
        """Σ e_j ∇ℓ_j sampled at the nodes."""
        components = []
        for component in range(self.grid.dim):
            total = 0.0
            for wall, part in enumerate(self._split(coefficients)):
                total = total + _contract(part, self._lift_matrices(wall, component, weighted=False))
            components.append(total)
        return np.stack(components, axis=coefficients.ndim - 1)

    def lift_values(self, coefficients: np.ndarray) -> np.ndarray:
        """Σ e_j ℓ_j sampled at the nodes."""
        total = 0.0
        for wall, part in enumerate(self._split(coefficients)):
            matrices = [self.profiles[axis] if axis == wall else self.cos[axis] for axis in range(self.grid.dim)]
            total = total + _contract(part, matrices)
        return total

    @cached_property
    def lift_factor(self):
        """Cholesky factor of the Gram matrix of the lift gradients with their cosine part removed."""
        count = self.lift_count
        gram = np.empty((count, count))
        identity = np.eye(count)
        for start in range(0, count, LIFT_BATCH):
            stop = min(count, start + LIFT_BATCH)
            units = identity[start:stop]
            gradients = self.lift_gradient(units)
            residuals = gradients - self.cosine_projection(gradients)
            gram[:, start:stop] = self.lift_inner(residuals).T
        logger.debug("Factorizing %d x %d lift Gram matrix on %s nodes", count, count, self.grid.shape)
        return cho_factor(0.5 * (gram + gram.T))


@lru_cache(maxsize=16)
def get_transform(grid: Grid) -> CosineTransform:
    return CosineTransform(grid)


def neumann_poisson_solve(
    rhs: ScalarField,
    *,
    tol: float = COMPATIBILITY_TOLERANCE,
    strict: bool = False,
) -> tuple[ScalarField, float]:
    """Solve −Δψ = rhs with ∂ψ/∂ν = 0 and zero mean.

    The rhs mean is removed first. Returns ψ and the removed mean. A mean above
    ``tol`` (relative to max|rhs|) is logged as a compatibility defect and raises
    ``CompatibilityDefect`` when ``strict``.
    """
    grid = rhs.grid
    transform = get_transform(grid)
    samples = rhs.samples
    mean = float(grid.mean(samples))
    scale = max(1.0, float(np.max(np.abs(samples)))) if samples.size else 1.0
    if abs(mean) > tol * scale:
        message = f"Neumann Poisson right-hand side has mean {mean:.3e}"
        if strict:
            raise CompatibilityDefect(message)
        logger.debug("%s; subtracted before solving", message)

    coefficients = fft.dctn(samples, type=1)
    eigenvalues = transform.eigenvalues
    solution = np.zeros_like(coefficients)
    nonzero = eigenvalues > 0
    solution[nonzero] = coefficients[nonzero] / eigenvalues[nonzero]
    psi = fft.idctn(solution, type=1)
    psi = psi - grid.mean(psi)
    return ScalarField(grid, psi), mean


def leray_project(v: VectorField, return_potential: bool = False):
    """Split v into Pv + Qv with Qv = ∇ψ and ∂ψ/∂ν = v·ν.

    Qv is the orthogonal projection onto the sampled gradients of the cosine
    modes and the boundary lifts; Pv = v − Qv is orthogonal to every such
    gradient, which is the weak form of div Pv = 0 with Pv·ν = 0. With
    ``return_potential`` the zero-mean ψ is returned as a third element.
    """
    grid = v.grid
    transform = get_transform(grid)
    coefficients = transform.gradient_coefficients(v.samples)
    q_cosine = transform.gradient_synthesis(coefficients)
    lifts = cho_solve(transform.lift_factor, transform.lift_inner(v.samples - q_cosine))
    lift_gradient = transform.lift_gradient(lifts)
    lift_coefficients = transform.gradient_coefficients(lift_gradient)
    q_samples = q_cosine + lift_gradient - transform.gradient_synthesis(lift_coefficients)
    q = VectorField(grid, q_samples)
    p = VectorField(grid, v.samples - q_samples)
    if not return_potential:
        return p, q
    psi = transform.synthesise(coefficients - lift_coefficients) + transform.lift_values(lifts)
    psi = psi - grid.mean(psi)
    return p, q, ScalarField(grid, psi)


def random_band_limited_vector(grid: Grid, modes: int, rng: np.random.Generator) -> VectorField:
    """Random smooth vector field built from the lowest ``modes`` wavenumbers per axis.

    Component a uses sin along axis a and cos along the others, the family the
    projection acts on.
    """
    transform = get_transform(grid)
    parts = []
    for axis in range(grid.dim):
        coefficients = np.zeros(transform.eigenvalues.shape)
        window = tuple(slice(0, modes + 1) for _ in range(grid.dim))
        coefficients[window] = rng.standard_normal(coefficients[window].shape)
        decay = 1.0 / (1.0 + transform.eigenvalues)
        parts.append(transform.synthesise(coefficients * decay, sine_axis=axis))
    return VectorField(grid, np.stack(parts))


def random_band_limited_scalar(grid: Grid, modes: int, rng: np.random.Generator) -> ScalarField:
    """Random zero-mean cosine series over the lowest ``modes`` wavenumbers per axis."""
    transform = get_transform(grid)
    coefficients = np.zeros(transform.eigenvalues.shape)
    window = tuple(slice(0, modes + 1) for _ in range(grid.dim))
    coefficients[window] = rng.standard_normal(coefficients[window].shape)
    coefficients.flat[0] = 0.0
    return ScalarField(grid, transform.synthesise(coefficients / (1.0 + transform.eigenvalues)))
