"""Discrete energy ledger with trapezoid-in-time dissipation accumulation."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Protocol

import numpy as np

from src.crystal.constitutive import internal_energy_density, penalty_energy, penalty_force
from src.crystal.params import ModelParams
from src.fields.models import DirectorField, ScalarField, VectorField
from src.fields.operators import dirichlet_energy, laplacian

LEDGER_COLUMNS = ["t", "kinetic", "internal", "elastic", "penalty", "diss_visc", "diss_dir", "total_plus_dissipation"]


class LedgerState(Protocol):
    t: float
    u: VectorField
    d: DirectorField


@dataclass(frozen=True)
class EnergyLedger:
    """Instantaneous energies, current dissipation rates and cumulative dissipation."""

    t: float
    kinetic: float
    internal: float
    elastic: float
    penalty: float
    diss_visc: float
    diss_dir: float
    visc_rate: float
    dir_rate: float

    @property
    def instantaneous(self) -> float:
        return self.kinetic + self.internal + self.elastic + self.penalty

    @property
    def total_plus_dissipation(self) -> float:
        return self.instantaneous + self.diss_visc + self.diss_dir

    def as_row(self) -> dict:
        row = {column: value for column, value in asdict(self).items() if column in LEDGER_COLUMNS}
        row["total_plus_dissipation"] = self.total_plus_dissipation
        return {column: row[column] for column in LEDGER_COLUMNS}


def dissipation_rates(u: np.ndarray, d: np.ndarray, grid, params: ModelParams) -> tuple[float, float]:
    """μ∫|∇u|² and λθ∫|Δd − f(d)|² over interior nodes."""
    visc = params.mu * dirichlet_energy(u, grid)
    molecular = laplacian(d, grid, "neumann") - penalty_force(d, params.sigma0)
    squared = np.sum(molecular**2, axis=0) * grid.interior_mask
    return visc, params.lambda_ * params.theta * float(np.sum(squared * grid.weights))


def energy_ledger(
    state: LedgerState,
    params: ModelParams,
    previous: Optional[EnergyLedger] = None,
    rho: Optional[ScalarField] = None,
) -> EnergyLedger:
    """Ledger entry for ``state``.

    Density is taken from ``rho`` or ``state.rho``; states without density are
    incompressible (ρ = 1, no internal energy). Cumulative dissipation continues
    from ``previous`` with the trapezoid rule in time.
    """
    grid = state.u.grid
    u = state.u.samples
    d = state.d.samples
    density = rho if rho is not None else getattr(state, "rho", None)

    if density is None:
        kinetic = 0.5 * float(np.sum(np.sum(u**2, axis=0) * grid.weights))
        internal = 0.0
    else:
        r = density.samples
        kinetic = 0.5 * float(np.sum(r * np.sum(u**2, axis=0) * grid.weights))
        internal = float(np.sum(internal_energy_density(r, params.gamma) * grid.weights)) / (
            params.epsilon**2 * (params.gamma - 1.0)
        )

    elastic = 0.5 * params.lambda_ * dirichlet_energy(d, grid)
    penalty_total = params.lambda_ * float(np.sum(penalty_energy(d, params.sigma0) * grid.weights))
    visc_rate, dir_rate = dissipation_rates(u, d, grid, params)

    diss_visc = diss_dir = 0.0
    if previous is not None:
        dt = state.t - previous.t
        diss_visc = previous.diss_visc + 0.5 * dt * (previous.visc_rate + visc_rate)
        diss_dir = previous.diss_dir + 0.5 * dt * (previous.dir_rate + dir_rate)

    return EnergyLedger(
        t=state.t,
        kinetic=kinetic,
        internal=internal,
        elastic=elastic,
        penalty=penalty_total,
        diss_visc=diss_visc,
        diss_dir=diss_dir,
        visc_rate=visc_rate,
        dir_rate=dir_rate,
    )
