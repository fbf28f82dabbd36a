"""Second-order finite-difference operators on node grids.

Sample arrays carry component axes first and grid axes last, so every helper works
on scalars, vectors and directors alike. ``edge_order=1`` gives the conservative
first derivative: centred inside, one-sided at the ends, and its trapezoid sum
telescopes to the boundary difference.
"""

from __future__ import annotations

from typing import Literal, Union

import numpy as np

from src.fields.grid import Grid
from src.fields.models import DirectorField, Field, ScalarField, TensorField, VectorField

OperatorKind = Literal["grad", "div", "curl", "laplacian"]
BoundaryHandling = Literal["neumann", "dirichlet", "one_sided"]


def _grid_axis(samples: np.ndarray, grid: Grid, axis: int) -> int:
    return samples.ndim - grid.dim + axis


def derivative(samples: np.ndarray, grid: Grid, axis: int, edge_order: int = 2) -> np.ndarray:
    """∂/∂x_axis of every component."""
    return np.gradient(samples, grid.spacing[axis], axis=_grid_axis(samples, grid, axis), edge_order=edge_order)


def gradient(samples: np.ndarray, grid: Grid, edge_order: int = 2) -> np.ndarray:
    """Stack of partial derivatives; the new axis sits just before the grid axes."""
    parts = [derivative(samples, grid, axis, edge_order) for axis in range(grid.dim)]
    return np.stack(parts, axis=samples.ndim - grid.dim)


def divergence(samples: np.ndarray, grid: Grid, edge_order: int = 2) -> np.ndarray:
    """Σ_a ∂_a v_a where the first axis of ``samples`` has length ``dim``."""
    if samples.shape[0] != grid.dim:
        raise ValueError(f"Divergence needs {grid.dim} leading components, got {samples.shape[0]}")
    return sum(derivative(samples[axis], grid, axis, edge_order) for axis in range(grid.dim))


def second_difference(samples: np.ndarray, grid: Grid, axis: int, bc: BoundaryHandling = "neumann") -> np.ndarray:
    """Three-point second difference along one axis."""
    ax = _grid_axis(samples, grid, axis)
    h2 = grid.spacing[axis] ** 2
    pad = [(0, 0)] * samples.ndim
    pad[ax] = (1, 1)
    # Reflection is the ghost value f[-1] = f[1] of a homogeneous Neumann condition.
    padded = np.pad(samples, pad, mode="reflect")
    n = samples.shape[ax]
    result = (
        np.take(padded, range(2, n + 2), axis=ax) - 2.0 * samples + np.take(padded, range(0, n), axis=ax)
    ) / h2
    if bc == "neumann":
        return result
    first = [slice(None)] * samples.ndim
    last = [slice(None)] * samples.ndim
    first[ax] = 0
    last[ax] = -1
    if bc == "dirichlet":
        result[tuple(first)] = 0.0
        result[tuple(last)] = 0.0
        return result
    if bc == "one_sided":
        f = [np.take(samples, i, axis=ax) for i in range(4)]
        g = [np.take(samples, n - 1 - i, axis=ax) for i in range(4)]
        result[tuple(first)] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2
        result[tuple(last)] = (2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]) / h2
        return result
    raise ValueError(f"Unknown boundary handling: {bc}")


def laplacian(samples: np.ndarray, grid: Grid, bc: BoundaryHandling = "neumann") -> np.ndarray:
    """Five-point (three-point on a slab) Laplacian of every component.

    ``dirichlet`` zeroes boundary rows; ``neumann`` uses mirrored ghost nodes.
    """
    return sum(second_difference(samples, grid, axis, bc) for axis in range(grid.dim))


def curl(samples: np.ndarray, grid: Grid, edge_order: int = 2) -> np.ndarray:
    """Scalar curl ∂_x v_y − ∂_y v_x of a planar vector field."""
    if grid.dim != 2:
        raise ValueError("curl is only defined on two-dimensional domains")
    return derivative(samples[1], grid, 0, edge_order) - derivative(samples[0], grid, 1, edge_order)


def jacobian(samples: np.ndarray, grid: Grid, edge_order: int = 2) -> np.ndarray:
    """∂_a d_c with shape ``(components, dim) + grid.shape``."""
    return gradient(samples, grid, edge_order)


def fourth_difference_filter(samples: np.ndarray, grid: Grid, strength: float) -> np.ndarray:
    """Subtract ``strength/16`` times the fourth difference along each axis.

    Only nodes at least two cells from the boundary are modified, so boundary
    values and their neighbours are left as they are.
    """
    if strength <= 0:
        return np.array(samples, copy=True)
    result = np.array(samples, dtype=float, copy=True)
    for axis in range(grid.dim):
        ax = _grid_axis(samples, grid, axis)
        n = samples.shape[ax]
        if n < 5:
            continue

        def part(start: int, stop: int) -> np.ndarray:
            return np.take(samples, range(start, stop), axis=ax)

        fourth = part(0, n - 4) - 4 * part(1, n - 3) + 6 * part(2, n - 2) - 4 * part(3, n - 1) + part(4, n)
        index = [slice(None)] * samples.ndim
        index[ax] = slice(2, n - 2)
        result[tuple(index)] -= strength / 16.0 * fourth
    return result


def dirichlet_energy(samples: np.ndarray, grid: Grid) -> float:
    """Edge-based discrete ∫|∇f|², summed over components.

    Pairs with the five-point Laplacian: Σ w·f·(−Δf) equals this quantity for
    fields that vanish on the boundary.
    """
    total = 0.0
    for axis in range(grid.dim):
        ax = _grid_axis(samples, grid, axis)
        diffs = np.diff(samples, axis=ax) ** 2 / grid.spacing[axis]
        # Other axes use trapezoid weights.
        weights = np.ones(1)
        for other in range(grid.dim):
            if other == axis:
                weights = np.multiply.outer(weights, np.ones(grid.cells[axis]))
            else:
                weights = np.multiply.outer(weights, grid.axis_weights[other])
        total += float(np.sum(diffs * weights[0]))
    return total


def diff_op(
    kind: OperatorKind,
    field: Field,
    *,
    bc: BoundaryHandling = "neumann",
    edge_order: int = 2,
) -> Union[ScalarField, VectorField, DirectorField, TensorField]:
    """Apply a differential operator to a field and wrap the result in the right field type."""
    grid = field.grid
    if kind == "grad":
        if not isinstance(field, ScalarField):
            raise ValueError(f"grad expects a ScalarField, got {type(field).__name__}")
        return VectorField(grid, gradient(field.samples, grid, edge_order))
    if kind == "div":
        if isinstance(field, VectorField):
            return ScalarField(grid, divergence(field.samples, grid, edge_order))
        if isinstance(field, TensorField):
            # Row divergence: (div T)_j = Σ_i ∂_i T_ij.
            rows = [divergence(field.samples[:, j], grid, edge_order) for j in range(grid.dim)]
            return VectorField(grid, np.stack(rows))
        raise ValueError(f"div expects a VectorField or TensorField, got {type(field).__name__}")
    if kind == "curl":
        if not isinstance(field, VectorField):
            raise ValueError(f"curl expects a VectorField, got {type(field).__name__}")
        return ScalarField(grid, curl(field.samples, grid, edge_order))
    if kind == "laplacian":
        if not isinstance(field, (ScalarField, VectorField, DirectorField)):
            raise ValueError(f"laplacian expects a scalar, vector or director field, got {type(field).__name__}")
        return field.with_samples(laplacian(field.samples, grid, bc))
    raise ValueError(f"Unknown operator kind: {kind}")
