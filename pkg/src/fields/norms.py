"""Trapezoid-rule norms and inner products of sampled fields."""

from __future__ import annotations

import math
from typing import Literal, Union

import numpy as np

from src.fields.models import Field
from src.fields.operators import gradient

NormKind = Literal["Lp", "L2", "H1-seminorm", "Linf"]


def norm(field: Union[Field, np.ndarray], kind: NormKind = "L2", p: float = 2.0, *, grid=None) -> float:
    """Composite-trapezoid norm of a field.

    ``Lp`` integrates |f|^p with |f| the Euclidean magnitude over components and
    ``Linf`` (or p = ∞) takes the largest |f|;
    ``H1-seminorm`` is the L² norm of the centred gradient. Raw sample arrays are
    accepted together with ``grid``.
    """
    if isinstance(field, Field):
        grid = field.grid
        samples = field.samples
    else:
        if grid is None:
            raise ValueError("A grid is required when passing raw samples")
        samples = np.asarray(field)

    leading = tuple(range(samples.ndim - grid.dim))
    if kind == "L2":
        kind, p = "Lp", 2.0
    if kind == "H1-seminorm":
        return norm(gradient(samples, grid), "L2", grid=grid)
    if kind not in ("Lp", "Linf"):
        raise ValueError(f"Unknown norm kind: {kind}")
    magnitude = np.abs(samples) ** 2
    if leading:
        magnitude = np.sum(magnitude, axis=leading)
    magnitude = np.sqrt(magnitude)
    if kind == "Linf" or math.isinf(p):
        return float(np.max(magnitude)) if magnitude.size else 0.0
    if p < 1:
        raise ValueError(f"Lp norms need p >= 1, got {p}")
    return float(np.sum(grid.weights * magnitude**p) ** (1.0 / p))


def inner(first: Field, second: Field) -> complex:
    """(f, g) = ∫ f·conj(g), summed over components."""
    if first.grid != second.grid:
        raise ValueError("Inner product of fields on different grids")
    return complex(np.sum(first.samples * np.conj(second.samples) * first.grid.weights))


def inner_samples(first: np.ndarray, second: np.ndarray, weights: np.ndarray) -> complex:
    """Array form of ``inner`` with explicit trapezoid weights."""
    return complex(np.sum(first * np.conj(second) * weights))
