"""Sparse operators on flattened node grids (C order, axis 0 slowest)."""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from src.fields.grid import Grid

logger = logging.getLogger(__name__)


def second_difference_1d(cells: int, spacing: float, bc: Literal["neumann", "dirichlet"]) -> sparse.csr_matrix:
    """Three-point second difference on ``cells + 1`` nodes.

    ``neumann`` mirrors the ghost node (row 0 is 2(f1 − f0)/h²); ``dirichlet``
    leaves the two boundary rows empty.
    """
    n = cells + 1
    main = np.full(n, -2.0)
    upper = np.ones(n - 1)
    lower = np.ones(n - 1)
    if bc == "neumann":
        upper[0] = 2.0
        lower[-1] = 2.0
    matrix = sparse.diags([lower, main, upper], [-1, 0, 1], format="lil")
    if bc == "dirichlet":
        matrix[0, :] = 0.0
        matrix[n - 1, :] = 0.0
    return (matrix / spacing**2).tocsr()


def first_difference_1d(cells: int, spacing: float) -> sparse.csr_matrix:
    """Centred first difference with first-order one-sided end rows (the conservative closure)."""
    n = cells + 1
    matrix = sparse.diags([-0.5 * np.ones(n - 1), 0.5 * np.ones(n - 1)], [-1, 1], format="lil")
    matrix[0, 0], matrix[0, 1] = -1.0, 1.0
    matrix[n - 1, n - 2], matrix[n - 1, n - 1] = -1.0, 1.0
    return (matrix / spacing).tocsr()


def _kron_axis(grid: Grid, axis: int, operator: sparse.spmatrix) -> sparse.csr_matrix:
    result = None
    for other, nodes in enumerate(grid.shape):
        factor = operator if other == axis else sparse.identity(nodes, format="csr")
        result = factor if result is None else sparse.kron(result, factor, format="csr")
    return result.tocsr()


def laplacian_matrix(grid: Grid, bc: Literal["neumann", "dirichlet"]) -> sparse.csr_matrix:
    """Five-point Laplacian; the Dirichlet form has zero rows at boundary nodes."""
    total = None
    for axis, (cells, h) in enumerate(zip(grid.cells, grid.spacing)):
        term = _kron_axis(grid, axis, second_difference_1d(cells, h, bc))
        total = term if total is None else total + term
    if bc == "dirichlet":
        total = sparse.diags(grid.interior_mask.ravel().astype(float)) @ total
    return total.tocsr()


def derivative_matrix(grid: Grid, axis: int) -> sparse.csr_matrix:
    return _kron_axis(grid, axis, first_difference_1d(grid.cells[axis], grid.spacing[axis]))


@lru_cache(maxsize=32)
def dirichlet_helmholtz_factor(grid: Grid, coefficient: float):
    """LU factors of I − c·Δ_D with identity rows on the boundary."""
    size = grid.size
    matrix = sparse.identity(size, format="csc") - coefficient * laplacian_matrix(grid, "dirichlet")
    logger.debug("Factorizing %d x %d Helmholtz operator (c = %.3e)", size, size, coefficient)
    return splu(matrix.tocsc())


def weighted_dirichlet_solve(grid: Grid, diagonal: np.ndarray, coefficient: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (diag(w) − c·Δ_D) x = rhs per component; boundary rows are identity.

    ``rhs`` has the components on axis 0.
    """
    interior = grid.interior_mask.ravel()
    diag = np.where(interior, diagonal.ravel(), 1.0)
    matrix = sparse.diags(diag) - coefficient * laplacian_matrix(grid, "dirichlet")
    factor = splu(matrix.tocsc())
    flat = rhs.reshape(rhs.shape[0], -1).T
    return factor.solve(np.ascontiguousarray(flat)).T.reshape(rhs.shape)


def solve_components(factor, rhs: np.ndarray) -> np.ndarray:
    """Apply a factorization to every component of ``rhs`` (components on axis 0)."""
    flat = rhs.reshape(rhs.shape[0], -1).T
    return factor.solve(np.ascontiguousarray(flat)).T.reshape(rhs.shape)


def centred_difference_1d(cells: int, spacing: float) -> sparse.csr_matrix:
    """The ``np.gradient`` stencil: centred inside, second-order one-sided end rows."""
    n = cells + 1
    matrix = sparse.diags([-0.5 * np.ones(n - 1), 0.5 * np.ones(n - 1)], [-1, 1], format="lil")
    matrix[0, 0], matrix[0, 1], matrix[0, 2] = -1.5, 2.0, -0.5
    matrix[n - 1, n - 3], matrix[n - 1, n - 2], matrix[n - 1, n - 1] = 0.5, -2.0, 1.5
    return (matrix / spacing).tocsr()


def clamped_extension_1d(cells: int) -> sparse.csr_matrix:
    """Map values on nodes 2..n−2 to all nodes with f₀ = fₙ = 0 and zero one-sided end slope.

    The end slope (−3f₀ + 4f₁ − f₂)/2h vanishes for f₁ = f₂/4.
    """
    n = cells + 1
    free = n - 4
    matrix = sparse.lil_matrix((n, free))
    for column in range(free):
        matrix[column + 2, column] = 1.0
    matrix[1, 0] = 0.25
    matrix[n - 2, free - 1] = 0.25
    return matrix.tocsr()


@lru_cache(maxsize=8)
def stream_function_operator(grid: Grid) -> sparse.csr_matrix:
    """u = (∂_y ψ, −∂_x ψ) for clamped stream functions, in the ``np.gradient`` stencil.

    ψ and its one-sided normal slope vanish on the walls, so u is zero on every wall
    node and its finite-difference divergence cancels exactly.
    """
    if grid.dim != 2:
        raise ValueError("Stream functions need a two-dimensional grid")
    (nx, ny), (hx, hy) = grid.cells, grid.spacing
    ex, ey = clamped_extension_1d(nx), clamped_extension_1d(ny)
    u_x = sparse.kron(ex, centred_difference_1d(ny, hy) @ ey, format="csr")
    u_y = -sparse.kron(centred_difference_1d(nx, hx) @ ex, ey, format="csr")
    return sparse.vstack([u_x, u_y], format="csr")


@lru_cache(maxsize=8)
def _solenoidal_factor(grid: Grid):
    operator = stream_function_operator(grid)
    weights = sparse.diags(np.tile(grid.weights.ravel(), grid.dim))
    normal = (operator.T @ weights @ operator).tocsc()
    logger.debug("Factorizing %d x %d stream-function normal equations", *normal.shape)
    return splu(normal)


def solenoidal_projection(samples: np.ndarray, grid: Grid) -> np.ndarray:
    """Trapezoid-orthogonal projection onto discretely divergence-free fields vanishing on the walls.

    A slab admits no such field besides zero.
    """
    if grid.dim == 1:
        return np.zeros_like(samples)
    operator = stream_function_operator(grid)
    weights = np.tile(grid.weights.ravel(), grid.dim)
    flat = samples.reshape(-1)
    psi = _solenoidal_factor(grid).solve(operator.T @ (weights * flat))
    return (operator @ psi).reshape(samples.shape) * grid.interior_mask
