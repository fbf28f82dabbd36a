"""Run driver shared by both solvers: stepping, ledger monitoring, traces, snapshots and checkpoints."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from src.acoustics.modes import ModeSampler, TraceRecorder, acoustic_forcing
from src.acoustics.wave import wave_state_from
from src.crystal.ledger import EnergyLedger, energy_ledger
from src.crystal.params import ModelParams
from src.errors import ConfigError, InstabilityError
from src.fields.grid import Grid
from src.fields.models import DirectorField, ScalarField, VectorField
from src.fields.operators import dirichlet_energy, divergence
from src.fields.storage import dump_field
from src.solvers.compressible import (
    CompressibleSolver,
    CompressibleState,
    NumericsOptions,
    mode_trace_stride,
    velocity_split,
)
from src.solvers.incompressible import IncompressibleSolver, IncompressibleState, initial_state
from src.solvers.initial import check_initial_density, initial_data_from_settings
from src.spectral.basis import build_basis
from src.spectral.domain import Domain

logger = logging.getLogger(__name__)

COMPRESSIBLE = "compressible"
INCOMPRESSIBLE = "incompressible"
ENERGY_FLOOR = 1e-12

State = Union[CompressibleState, IncompressibleState]


@dataclass
class Trajectory:
    """Snapshots of one run at the output times."""

    kind: str
    grid: Grid
    epsilon: Optional[float]
    times: list[float] = field(default_factory=list)
    u: list[np.ndarray] = field(default_factory=list)
    d: list[np.ndarray] = field(default_factory=list)
    rho: list[np.ndarray] = field(default_factory=list)

    def append(self, state: State) -> None:
        self.times.append(state.t)
        self.u.append(np.array(state.u.samples))
        self.d.append(np.array(state.d.samples))
        if isinstance(state, CompressibleState):
            self.rho.append(np.array(state.rho.samples))

    @property
    def time_array(self) -> np.ndarray:
        return np.asarray(self.times)

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class RunDiagnostics:
    """Scalar health indicators of a run."""

    steps: int = 0
    final_time: float = 0.0
    mass_drift: float = 0.0
    max_director: float = 0.0
    director_bound: float = 1.0
    energy_drift: float = 0.0
    max_divergence_ratio: float = 0.0
    u1_mass: float = 0.0
    u2_mass: float = 0.0
    status: str = "completed"
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    """Everything a run produces; files are written by the harness exporters."""

    kind: str
    epsilon: Optional[float]
    content_hash: str
    trajectory: Trajectory
    ledger: list[EnergyLedger]
    mode_rows: list[dict]
    diagnostics: RunDiagnostics
    checkpoints: list[str] = field(default_factory=list)

    @property
    def run_id(self) -> str:
        return run_identifier(self.kind, self.content_hash, self.epsilon)


def run_identifier(kind: str, content_hash: str, epsilon: Optional[float] = None) -> str:
    """Catalog id: hash prefix plus ``inc`` or the Mach parameter."""
    suffix = "inc" if kind == INCOMPRESSIBLE else f"eps{epsilon:.6g}"
    return f"{content_hash[:12]}-{suffix}"


def step_count(T: float, dt: float) -> int:  # noqa: N803
    """Number of uniform steps reaching T; T must be a multiple of dt."""
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ConfigError(f"Final time {T} is not a whole number of steps of {dt}")
    return steps


class _LedgerMonitor:
    """Accumulates the ledger every step and aborts when total-plus-dissipation grows."""

    def __init__(self, params: ModelParams, tolerance: float):
        self.params = params
        self.tolerance = tolerance
        self.current: Optional[EnergyLedger] = None
        self.initial_total = 0.0
        self.max_drift = 0.0

    def update(self, state: State) -> EnergyLedger:
        entry = energy_ledger(state, self.params, previous=self.current)
        if self.current is None:
            self.initial_total = entry.total_plus_dissipation
        self.current = entry
        total = entry.total_plus_dissipation
        if not math.isfinite(total):
            raise InstabilityError(f"Energy ledger is not finite at t={state.t:.6f}", time=state.t)
        drift = (total - self.initial_total) / max(abs(self.initial_total), ENERGY_FLOOR)
        self.max_drift = max(self.max_drift, drift)
        if drift > self.tolerance:
            raise InstabilityError(
                f"Total energy plus dissipation grew by {drift:.2%} at t={state.t:.6f} "
                f"(tolerance {self.tolerance:.2%})",
                time=state.t,
            )
        return entry


def _dump_checkpoint(state: State, directory: Path, step: int) -> list[str]:
    fields: dict[str, Union[ScalarField, VectorField, DirectorField]] = {"u": state.u, "d": state.d}
    if isinstance(state, CompressibleState):
        fields["rho"] = state.rho
    else:
        fields["pi"] = state.pi
    written = []
    for name, value in sorted(fields.items()):
        data_path, _ = dump_field(value, directory / f"{name}_{step:06d}")
        written.append(str(data_path))
    return written


def build_states(settings, kind: str) -> tuple[Grid, ModelParams, State]:
    """Grid, parameters and initial state described by ``settings``."""
    domain = Domain.from_settings(settings.domain)
    grid = Grid(domain, settings.grid.nx, settings.grid.ny)
    params = ModelParams.from_settings(settings.params)
    data = initial_data_from_settings(settings, grid)
    director = DirectorField(grid, data.d)
    if kind == COMPRESSIBLE:
        check_initial_density(data, params)
        state: State = CompressibleState(
            t=0.0,
            rho=ScalarField(grid, data.density(params.epsilon)),
            u=VectorField(grid, np.where(grid.interior_mask, data.u, 0.0)),
            d=director,
            params=params,
            boundary=director,
        )
    elif kind == INCOMPRESSIBLE:
        state = initial_state(data.u, data.d, grid, params)
    else:
        raise ConfigError(f"Unknown run kind: {kind}")
    return grid, params, state


def run(
    settings,
    kind: str = COMPRESSIBLE,
    checkpoint_dir: Optional[Path] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> RunResult:
    """Advance the configured initial data to the final time T.

    Emits a ledger row and a trajectory snapshot every ``output_stride`` steps,
    mode-amplitude rows at the acoustic trace stride (compressible runs only) and
    checkpoint fields every ``checkpoint_every`` snapshots plus the final state.
    """
    grid, params, state = build_states(settings, kind)
    numerics = NumericsOptions.from_settings(settings)
    dt = settings.time.dt
    steps = step_count(settings.time.T, dt)
    stride = settings.time.output_stride

    solver: Union[CompressibleSolver, IncompressibleSolver]
    if kind == COMPRESSIBLE:
        solver = CompressibleSolver(grid, params, numerics)
    else:
        solver = IncompressibleSolver(grid, params, numerics)

    recorder: Optional[TraceRecorder] = None
    trace_stride = 0
    if kind == COMPRESSIBLE:
        basis = build_basis(grid.domain, settings.modes.count, params.mu)
        sampler = ModeSampler(basis, grid)
        recorder = TraceRecorder(sampler, consistency_bound=params.epsilon ** (params.alpha / 2.0))
        largest = max(mode.lambda0 for mode in basis.modes)
        trace_stride = mode_trace_stride(dt, largest, params, settings.modes.steps_per_period)

    monitor = _LedgerMonitor(params, settings.time.energy_tolerance)
    trajectory = Trajectory(kind=kind, grid=grid, epsilon=params.epsilon if kind == COMPRESSIBLE else None)
    ledger_rows: list[EnergyLedger] = []
    diagnostics = RunDiagnostics()
    checkpoints: list[str] = []

    initial_mass = state.mass() if isinstance(state, CompressibleState) else 0.0
    diagnostics.director_bound = max(1.0, float(np.max(np.linalg.norm(state.d.samples, axis=0))))

    def observe(current: State, step_index: int) -> None:
        entry = monitor.update(current)
        diagnostics.max_director = max(diagnostics.max_director, float(np.max(np.linalg.norm(current.d.samples, axis=0))))
        if isinstance(current, CompressibleState):
            mass = current.mass()
            diagnostics.mass_drift = max(diagnostics.mass_drift, abs(mass - initial_mass) / abs(initial_mass))
            if recorder is not None and step_index % trace_stride == 0:
                forcing = acoustic_forcing(current, recorder.sampler.basis, sampler=recorder.sampler)
                recorder.record(current.t, wave_state_from(current), forcing)
        if step_index % stride == 0 or step_index == steps:
            ledger_rows.append(entry)
            trajectory.append(current)
            if isinstance(current, IncompressibleState):
                gradient_norm = math.sqrt(dirichlet_energy(current.u.samples, grid))
                divergence_norm = math.sqrt(float(grid.integrate(divergence(current.u.samples, grid) ** 2)))
                if gradient_norm > 0:
                    ratio = divergence_norm / gradient_norm
                    diagnostics.max_divergence_ratio = max(diagnostics.max_divergence_ratio, ratio)
            snapshot = len(trajectory) - 1
            if checkpoint_dir is not None and (snapshot % settings.time.checkpoint_every == 0 or step_index == steps):
                checkpoints.extend(_dump_checkpoint(current, Path(checkpoint_dir), step_index))

    logger.info(
        "Starting %s run: eps=%s, %d steps of %.3e on %s nodes",
        kind,
        f"{params.epsilon:.4g}" if kind == COMPRESSIBLE else "-",
        steps,
        dt,
        grid.shape,
    )
    observe(state, 0)
    for step_index in range(1, steps + 1):
        state = solver.step(state, dt)  # type: ignore[arg-type]
        observe(state, step_index)
        if progress is not None:
            progress(step_index, steps)
        if step_index % stride == 0:
            logger.debug("t=%.4f total+diss=%.6e", state.t, monitor.current.total_plus_dissipation if monitor.current else 0.0)

    diagnostics.steps = steps
    diagnostics.final_time = state.t
    diagnostics.energy_drift = monitor.max_drift
    if isinstance(state, CompressibleState):
        _, _, diagnostics.u1_mass, diagnostics.u2_mass = velocity_split(state)
    logger.info("Finished %s run at t=%.4f (energy drift %.3e)", kind, state.t, monitor.max_drift)

    return RunResult(
        kind=kind,
        epsilon=params.epsilon if kind == COMPRESSIBLE else None,
        content_hash=settings.content_hash(),
        trajectory=trajectory,
        ledger=ledger_rows,
        mode_rows=recorder.rows() if recorder is not None else [],
        diagnostics=diagnostics,
        checkpoints=checkpoints,
    )
