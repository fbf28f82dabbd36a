"""Domains, the closed-form Neumann eigenbasis and damping classification."""

from src.spectral.basis import (
    DampingCorrection,
    ModeClass,
    NeumannMode,
    SpectralBasis,
    WaveEigenvector,
    approximate_eigenvalue,
    build_basis,
    damping_correction,
    eigenpair,
)
from src.spectral.condition import ConditionHReport, check_condition_H
from src.spectral.domain import Domain, DomainKind

__all__ = [
    "ConditionHReport",
    "DampingCorrection",
    "Domain",
    "DomainKind",
    "ModeClass",
    "NeumannMode",
    "SpectralBasis",
    "WaveEigenvector",
    "approximate_eigenvalue",
    "build_basis",
    "check_condition_H",
    "damping_correction",
    "eigenpair",
]
