"""Unit-speed wave operators and the linearized dissipative wave integrator.

The state Φ = (φ, m) evolves by ∂_t Φ = −L_ε Φ/ε with
L_ε(φ, m) = (div m, ∇φ − εμΔm) and m = 0 on the walls.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from src.fields.grid import Grid
from src.fields.models import ScalarField, VectorField
from src.fields.operators import derivative, divergence, laplacian
from src.solvers.matrices import derivative_matrix, laplacian_matrix

if TYPE_CHECKING:
    from src.acoustics.modes import AcousticTrace
    from src.solvers.compressible import CompressibleState
    from src.spectral.basis import SpectralBasis

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PERIOD = 32


@dataclass(frozen=True)
class WaveState:
    """Density fluctuation φ and momentum m with m = 0 on the walls."""

    phi: ScalarField
    m: VectorField
    epsilon: float

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    def energy(self) -> float:
        """½(‖φ‖² + ‖m‖²)."""
        weights = self.grid.weights
        total = np.sum(np.abs(self.phi.samples) ** 2 * weights) + np.sum(np.abs(self.m.samples) ** 2 * weights)
        return 0.5 * float(total)


def wave_state_from(state: "CompressibleState") -> WaveState:
    """Unit-speed wave variables of a compressible state: (√γ(ρ − 1)/ε, ρu) with ε/√γ."""
    params = state.params
    speed = params.sound_speed
    phi = speed * (state.rho.samples - 1.0) / params.epsilon
    return WaveState(
        phi=ScalarField(state.grid, phi),
        m=state.momentum,
        epsilon=params.epsilon / speed,
    )


def apply_wave_operator(state: WaveState, viscous: bool = False, mu: float = 0.0) -> WaveState:
    """L(φ, m) = (div m, ∇φ); with ``viscous`` the momentum part gains −εμΔm.

    Derivatives use the conservative closure, so Re⟨LΦ, Φ⟩ vanishes when m = 0
    on the walls. Complex samples are supported.
    """
    grid = state.grid
    phi = state.phi.samples
    m = state.m.samples
    new_phi = divergence(m, grid, edge_order=1)
    new_m = np.stack([derivative(phi, grid, axis, edge_order=1) for axis in range(grid.dim)])
    if viscous:
        new_m = new_m - state.epsilon * mu * laplacian(m, grid, "dirichlet")
    field_type = type(state.phi)
    return WaveState(
        phi=field_type(grid, new_phi),
        m=type(state.m)(grid, new_m),
        epsilon=state.epsilon,
    )


def wave_system_matrix(grid: Grid, epsilon: float, mu: float) -> sparse.csr_matrix:
    """Right-hand side operator K of ∂_t X = K X for X = (φ, m_0, ..., m_{dim-1}) flattened."""
    interior = sparse.diags(grid.interior_mask.ravel().astype(float))
    derivatives = [derivative_matrix(grid, axis) for axis in range(grid.dim)]
    viscous = mu * laplacian_matrix(grid, "dirichlet")
    blocks: list[list[Optional[sparse.spmatrix]]] = [[None] + [-(1.0 / epsilon) * d for d in derivatives]]
    for axis, d in enumerate(derivatives):
        row: list[Optional[sparse.spmatrix]] = [-(1.0 / epsilon) * (interior @ d)]
        row += [viscous if other == axis else None for other in range(grid.dim)]
        blocks.append(row)
    blocks[0][0] = sparse.csr_matrix((grid.size, grid.size))
    return sparse.bmat(blocks, format="csr")


@dataclass
class WaveRun:
    """Result of a linearized wave run."""

    times: np.ndarray
    energy: np.ndarray
    final: WaveState
    traces: dict = field(default_factory=dict)
    snapshots: list[WaveState] = field(default_factory=list)
    dt: float = 0.0

    def trace(self, index: Sequence[int], sign: int = 1) -> "AcousticTrace":
        return self.traces[(tuple(index), sign)]


def wave_time_step(epsilon: float, lambda0: float, steps_per_period: int) -> float:
    """dt giving ``steps_per_period`` steps per period 2πε/λ."""
    return 2.0 * math.pi * epsilon / (lambda0 * steps_per_period)


def linearized_wave_run(
    phi0: ScalarField,
    m0: VectorField,
    epsilon: float,
    mu: float,
    T: float,  # noqa: N803
    *,
    basis: Optional["SpectralBasis"] = None,
    track: Optional[Sequence[Sequence[int]]] = None,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    snapshot_stride: int = 0,
) -> WaveRun:
    """Crank-Nicolson integration of the homogeneous dissipative wave system.

    The operator is factorized once. When ``basis`` is given, amplitudes of the
    tracked modes (all basis modes by default) are recorded every step.
    """
    from src.acoustics.modes import ModeSampler, TraceRecorder

    if epsilon <= 0 or T <= 0:
        raise ValueError(f"epsilon and T must be positive, got epsilon={epsilon}, T={T}")
    grid = phi0.grid
    sampler = None
    recorder = None
    reference_lambda = 1.0
    if basis is not None:
        sampler = ModeSampler(basis, grid)
        if track is not None:
            wanted = {tuple(index) for index in track}
            sampler.sampled = [item for item in sampler.sampled if item.mode.index in wanted]
            if not sampler.sampled:
                raise ValueError(f"None of the tracked modes {sorted(wanted)} belong to the basis")
        recorder = TraceRecorder(sampler)
        lambdas = [item.mode.lambda0 for item in sampler.sampled if not item.mode.is_constant]
        if lambdas:
            reference_lambda = max(lambdas)

    dt = wave_time_step(epsilon, reference_lambda, steps_per_period)
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    dt = T / steps

    system = wave_system_matrix(grid, epsilon, mu)
    identity = sparse.identity(system.shape[0], format="csr")
    lhs = splu((identity - 0.5 * dt * system).tocsc())
    rhs_operator = (identity + 0.5 * dt * system).tocsr()
    logger.info("Linearized wave run: %d steps of %.3e on %s nodes", steps, dt, grid.shape)

    m_start = np.where(grid.interior_mask, m0.samples, 0.0)
    state = np.concatenate([phi0.samples.ravel(), m_start.reshape(-1)])

    def unpack(vector: np.ndarray) -> WaveState:
        phi = vector[: grid.size].reshape(grid.shape)
        m = vector[grid.size :].reshape((grid.dim,) + grid.shape)
        return WaveState(ScalarField(grid, phi), VectorField(grid, m), epsilon)

    times = [0.0]
    current = unpack(state)
    energies = [current.energy()]
    snapshots = [current] if snapshot_stride else []
    if recorder is not None:
        recorder.record(0.0, current)

    for n in range(1, steps + 1):
        state = lhs.solve(rhs_operator @ state)
        t = n * dt
        current = unpack(state)
        times.append(t)
        energies.append(current.energy())
        if recorder is not None:
            recorder.record(t, current)
        if snapshot_stride and n % snapshot_stride == 0:
            snapshots.append(current)

    return WaveRun(
        times=np.asarray(times),
        energy=np.asarray(energies),
        final=current,
        traces=recorder.traces if recorder is not None else {},
        snapshots=snapshots,
        dt=dt,
    )
