"""Node-centred uniform grids with trapezoid quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from src.errors import ConfigError
from src.spectral.domain import Domain

MIN_CELLS = 8


def trapezoid_weights(cells: int, spacing: float) -> np.ndarray:
    """1D trapezoid weights on ``cells + 1`` nodes."""
    weights = np.full(cells + 1, spacing)
    weights[0] = weights[-1] = 0.5 * spacing
    return weights


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred grid over a domain.

    A rectangle with ``nx`` x ``ny`` cells has ``(nx + 1, ny + 1)`` nodes that include
    the boundary. A slab has ``nx + 1`` nodes and ignores ``ny``. Axis 0 is x.
    """

    domain: Domain
    nx: int
    ny: Optional[int] = None

    def __post_init__(self) -> None:
        if self.nx < MIN_CELLS:
            raise ConfigError(f"Grid needs at least {MIN_CELLS} cells per axis, got nx={self.nx}")
        if self.domain.is_slab:
            object.__setattr__(self, "ny", None)
            return
        ny = self.nx if self.ny is None else self.ny
        if ny < MIN_CELLS:
            raise ConfigError(f"Grid needs at least {MIN_CELLS} cells per axis, got ny={ny}")
        object.__setattr__(self, "ny", ny)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def cells(self) -> tuple[int, ...]:
        if self.ny is None:
            return (self.nx,)
        return (self.nx, self.ny)

    @property
    def shape(self) -> tuple[int, ...]:
        """Node counts per axis."""
        return tuple(count + 1 for count in self.cells)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / count for length, count in zip(self.domain.extents, self.cells))

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1D node coordinates per axis."""
        return tuple(np.linspace(0.0, length, count + 1) for length, count in zip(self.domain.extents, self.cells))

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        """Node coordinates broadcast to the grid shape (``indexing='ij'``)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def axis_weights(self) -> tuple[np.ndarray, ...]:
        return tuple(trapezoid_weights(count, h) for count, h in zip(self.cells, self.spacing))

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor trapezoid weights; they sum to the domain measure."""
        result = self.axis_weights[0]
        for axis_weights in self.axis_weights[1:]:
            result = np.multiply.outer(result, axis_weights)
        return result

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            index: list = [slice(None)] * self.dim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    @cached_property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    def integrate(self, values: np.ndarray) -> float | complex:
        """Trapezoid integral of a scalar sample array (leading axes are summed too)."""
        return np.sum(values * self.weights)

    def mean(self, values: np.ndarray) -> float | complex:
        return self.integrate(values) / self.domain.measure

    def coarsened(self, factor: int = 2) -> "Grid":
        """Grid with ``factor`` times fewer cells per axis; nodes are a subset of this grid's."""
        if any(count % factor for count in self.cells):
            raise ConfigError(f"Cannot coarsen {self.cells} cells by a factor of {factor}")
        ny = None if self.ny is None else self.ny // factor
        return Grid(self.domain, self.nx // factor, ny)

    def restrict(self, values: np.ndarray, factor: int = 2) -> np.ndarray:
        """Sample a fine-grid array on the nodes of ``coarsened(factor)``."""
        index = (Ellipsis,) + tuple(slice(None, None, factor) for _ in range(self.dim))
        return values[index]
