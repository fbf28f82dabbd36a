"""Sampled fields, finite-difference operators, spectral projections and norms."""

from src.fields.grid import Grid
from src.fields.models import ComplexField, DirectorField, Field, ScalarField, TensorField, VectorField
from src.fields.norms import inner, norm
from src.fields.operators import diff_op
from src.fields.transforms import CosineTransform, get_transform, leray_project, neumann_poisson_solve

__all__ = [
    "ComplexField",
    "CosineTransform",
    "DirectorField",
    "Field",
    "Grid",
    "ScalarField",
    "TensorField",
    "VectorField",
    "diff_op",
    "get_transform",
    "inner",
    "leray_project",
    "neumann_poisson_solve",
    "norm",
]
