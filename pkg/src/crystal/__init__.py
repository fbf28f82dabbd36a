"""Constitutive laws of the nematic system and its energy ledger."""

from src.crystal.constitutive import (
    density_fluctuation,
    ericksen_force,
    ericksen_stress,
    internal_energy_density,
    penalty,
    pressure,
    pressure_remainder,
)
from src.crystal.ledger import LEDGER_COLUMNS, EnergyLedger, energy_ledger
from src.crystal.params import ModelParams

__all__ = [
    "LEDGER_COLUMNS",
    "EnergyLedger",
    "ModelParams",
    "density_fluctuation",
    "energy_ledger",
    "ericksen_force",
    "ericksen_stress",
    "internal_energy_density",
    "penalty",
    "pressure",
    "pressure_remainder",
]
