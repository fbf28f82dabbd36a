"""Immutable sampled fields on a node grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional, TypeVar

import numpy as np

from src.fields.grid import Grid

F = TypeVar("F", bound="Field")


@dataclass(frozen=True, eq=False)
class Field:
    """Samples at every grid node with a fixed number of leading component axes.

    The sample array is copied on construction and marked read-only.
    """

    grid: Grid
    samples: np.ndarray

    kind: ClassVar[str] = "field"
    dtype: ClassVar[type] = float

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=self.dtype, copy=True)
        expected = self.expected_shape(self.grid)
        if expected is not None and samples.shape != expected:
            raise ValueError(f"{type(self).__name__} expects samples of shape {expected}, got {samples.shape}")
        if samples.shape[-self.grid.dim :] != self.grid.shape:
            raise ValueError(f"Samples of shape {samples.shape} do not end with grid shape {self.grid.shape}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @classmethod
    def expected_shape(cls, grid: Grid) -> Optional[tuple[int, ...]]:
        return None

    @classmethod
    def zeros(cls: type[F], grid: Grid) -> F:
        shape = cls.expected_shape(grid)
        return cls(grid, np.zeros(shape if shape is not None else grid.shape, dtype=cls.dtype))

    @property
    def components(self) -> int:
        leading = self.samples.shape[: self.samples.ndim - self.grid.dim]
        return int(np.prod(leading)) if leading else 1

    def with_samples(self: F, samples: np.ndarray) -> F:
        return type(self)(self.grid, samples)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude over the component axes."""
        leading = tuple(range(self.samples.ndim - self.grid.dim))
        if not leading:
            return np.abs(self.samples)
        return np.sqrt(np.sum(np.abs(self.samples) ** 2, axis=leading))

    def boundary_values(self) -> np.ndarray:
        return self.samples[..., self.grid.boundary_mask]

    def _check_compatible(self, other: "Field") -> None:
        if other.grid != self.grid or other.samples.shape != self.samples.shape:
            raise ValueError(f"Incompatible fields: {type(self).__name__} on {self.grid} vs {type(other).__name__}")

    def __add__(self: F, other: "Field") -> F:
        self._check_compatible(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self: F, other: "Field") -> F:
        self._check_compatible(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self: F, scalar: float) -> F:
        return self.with_samples(self.samples * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ScalarField(Field):
    kind: ClassVar[str] = "scalar"

    @classmethod
    def expected_shape(cls, grid: Grid) -> Optional[tuple[int, ...]]:
        return grid.shape


@dataclass(frozen=True, eq=False)
class VectorField(Field):
    """``dim`` components: 2 on a rectangle, 1 on a slab."""

    kind: ClassVar[str] = "vector"

    @classmethod
    def expected_shape(cls, grid: Grid) -> Optional[tuple[int, ...]]:
        return (grid.dim,) + grid.shape


@dataclass(frozen=True, eq=False)
class DirectorField(Field):
    """Three components over a 1D or 2D domain."""

    kind: ClassVar[str] = "director"

    @classmethod
    def expected_shape(cls, grid: Grid) -> Optional[tuple[int, ...]]:
        return (3,) + grid.shape


@dataclass(frozen=True, eq=False)
class TensorField(Field):
    """``dim`` x ``dim`` components."""

    kind: ClassVar[str] = "tensor"

    @classmethod
    def expected_shape(cls, grid: Grid) -> Optional[tuple[int, ...]]:
        return (grid.dim, grid.dim) + grid.shape


@dataclass(frozen=True, eq=False)
class ComplexField(Field):
    """Complex samples with any number of leading component axes."""

    kind: ClassVar[str] = "complex"
    dtype: ClassVar[type] = complex


FIELD_TYPES: dict[str, type[Field]] = {
    cls.kind: cls for cls in (ScalarField, VectorField, DirectorField, TensorField, ComplexField)
}
