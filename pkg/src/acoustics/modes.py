"""Projections of wave states and forcing onto the wave eigenvectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from src.acoustics.wave import WaveState
from src.crystal.constitutive import ericksen_force_samples, pressure_remainder
from src.fields.grid import Grid
from src.fields.models import VectorField
from src.fields.operators import dirichlet_energy, divergence, gradient, laplacian
from src.fields.transforms import leray_project
from src.spectral.basis import ModeClass, NeumannMode, SpectralBasis, WaveEigenvector

if TYPE_CHECKING:
    from src.solvers.compressible import CompressibleState

logger = logging.getLogger(__name__)

ModeKey = tuple[tuple[int, ...], int]
FORCING_COMPONENTS = ("convection", "pressure", "elastic", "viscous")
MODE_COLUMNS = ["t", "m", "n", "sign", "re_b", "im_b", "abs_b", "re_c", "im_c"]


@dataclass
class SampledMode:
    """A wave eigenvector pair sampled once on a grid."""

    mode: NeumannMode
    scalar: np.ndarray
    vector_plus: np.ndarray

    def vector(self, sign: int) -> np.ndarray:
        return self.vector_plus if sign > 0 else -self.vector_plus


class ModeSampler:
    """Caches sampled eigenvectors of a basis on one grid."""

    def __init__(self, basis: SpectralBasis, grid: Grid):
        if basis.domain != grid.domain:
            raise ValueError("Basis and grid live on different domains")
        largest = basis.max_wavenumber_index()
        if any(index >= cells for index, cells in zip(largest, grid.cells)):
            raise ValueError(f"Basis modes up to {largest} are not resolved by a grid with {grid.cells} cells")
        self.basis = basis
        self.grid = grid
        self.sampled = [
            SampledMode(
                mode=mode,
                scalar=mode.sample(grid),
                vector_plus=WaveEigenvector(mode, 1).vector_part(grid),
            )
            for mode in basis.modes
        ]

    def amplitudes(self, phi: np.ndarray, m: np.ndarray) -> dict[ModeKey, complex]:
        weights = self.grid.weights
        result: dict[ModeKey, complex] = {}
        for item in self.sampled:
            scalar_part = complex(np.sum(phi * item.scalar * weights))
            vector_part = complex(np.sum(m * np.conj(item.vector_plus) * weights))
            result[(item.mode.index, 1)] = scalar_part + vector_part
            result[(item.mode.index, -1)] = scalar_part - vector_part
        return result

    def vector_projections(self, g: np.ndarray) -> dict[ModeKey, complex]:
        """(g, m_k^±) for every mode and sign."""
        weights = self.grid.weights
        result: dict[ModeKey, complex] = {}
        for item in self.sampled:
            value = complex(np.sum(g * np.conj(item.vector_plus) * weights))
            result[(item.mode.index, 1)] = value
            result[(item.mode.index, -1)] = -value
        return result


def mode_amplitudes(state: WaveState, basis: SpectralBasis, sampler: Optional[ModeSampler] = None) -> dict[ModeKey, complex]:
    """β_k^± = (φ, Φ_k) + (m, m_k^±) for every retained mode."""
    sampler = sampler or ModeSampler(basis, state.grid)
    return sampler.amplitudes(state.phi.samples, state.m.samples)


def forcing_components(state: "CompressibleState") -> dict[str, np.ndarray]:
    """The nonlinear forcing g_ε split into convection, pressure remainder, elastic and viscous parts.

    The linear pressure ∇ρ/ε lives in the wave operator, so only the remainder
    (ρ^γ − 1 − γ(ρ − 1))/ε² enters here. The elastic part −λ div(∇d⊙∇d) + λ∇(½|∇d|² + F)
    is the divergence of the Ericksen stress. The viscous part μΔ(u − m) is what
    the viscous wave operator misses when ρ ≠ 1.
    """
    grid = state.grid
    params = state.params
    rho = state.rho.samples
    u = state.u.samples
    m = rho * u
    convection = -np.stack([divergence(m * u[j], grid) for j in range(grid.dim)])
    remainder = pressure_remainder(rho, params)
    pressure_part = -gradient(remainder, grid)
    elastic = ericksen_force_samples(state.d.samples, grid, params.lambda_, params.sigma0)
    viscous = params.mu * (laplacian(u, grid, "dirichlet") - laplacian(m, grid, "dirichlet"))
    return {"convection": convection, "pressure": pressure_part, "elastic": elastic, "viscous": viscous}


def acoustic_forcing(
    state: "CompressibleState",
    basis: SpectralBasis,
    *,
    components: bool = False,
    sampler: Optional[ModeSampler] = None,
):
    """c_k^± = (g_ε, m_k^±); with ``components`` returns one mapping per forcing part."""
    sampler = sampler or ModeSampler(basis, state.grid)
    parts = forcing_components(state)
    if components:
        return {name: sampler.vector_projections(parts[name]) for name in FORCING_COMPONENTS}
    return sampler.vector_projections(sum(parts.values()))


@dataclass
class AcousticTrace:
    """Time series of one mode amplitude and its forcing projection.

    ``b`` is the zeroth-order amplitude, equal to ``beta``; ``consistency_bound``
    is the recorded size ε^{α/2} of the neglected difference.
    """

    index: tuple[int, ...]
    sign: int
    times: list[float] = field(default_factory=list)
    beta: list[complex] = field(default_factory=list)
    c: list[complex] = field(default_factory=list)
    consistency_bound: float = 0.0

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=complex)

    def append(self, t: float, beta: complex, c: complex = 0j) -> None:
        self.times.append(t)
        self.beta.append(beta)
        self.c.append(c)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.beta, dtype=complex), np.asarray(self.c, dtype=complex)

    def rows(self) -> list[dict]:
        m = self.index[0]
        n = self.index[1] if len(self.index) > 1 else 0
        return [
            {
                "t": t,
                "m": m,
                "n": n,
                "sign": "+" if self.sign > 0 else "-",
                "re_b": beta.real,
                "im_b": beta.imag,
                "abs_b": abs(beta),
                "re_c": c.real,
                "im_c": c.imag,
            }
            for t, beta, c in zip(self.times, self.beta, self.c)
        ]


class TraceRecorder:
    """Collects AcousticTraces for every retained mode and sign."""

    def __init__(self, sampler: ModeSampler, consistency_bound: float = 0.0):
        self.sampler = sampler
        self.traces: dict[ModeKey, AcousticTrace] = {}
        for item in sampler.sampled:
            for sign in (1, -1):
                self.traces[(item.mode.index, sign)] = AcousticTrace(
                    index=item.mode.index, sign=sign, consistency_bound=consistency_bound
                )

    def record(self, t: float, wave: WaveState, forcing: Optional[dict[ModeKey, complex]] = None) -> None:
        amplitudes = self.sampler.amplitudes(wave.phi.samples, wave.m.samples)
        for key, value in amplitudes.items():
            self.traces[key].append(t, value, forcing.get(key, 0j) if forcing else 0j)

    def rows(self) -> list[dict]:
        rows: list[dict] = []
        for trace in self.traces.values():
            rows.extend(trace.rows())
        rows.sort(key=lambda row: (row["t"], row["n"], row["m"], row["sign"]))
        return rows


@dataclass(frozen=True)
class QSplit:
    """Q₁u (damped modes), Q₂u (undamped modes) and what the truncation leaves out."""

    q1: VectorField
    q2: VectorField
    tail_norm: float
    tail_bound: float

    @property
    def q1_norm(self) -> float:
        return float(np.sqrt(np.sum(np.sum(self.q1.samples**2, axis=0) * self.q1.grid.weights)))


def q_split(u: VectorField, basis: SpectralBasis, sampler: Optional[ModeSampler] = None) -> QSplit:
    """Expand Qu in {∇Φ_k/λ_k} and sum by damping class.

    The tail bound ‖∇u‖²/λ²_{N+1} controls the part of Qu beyond the truncation.
    """
    grid = u.grid
    sampler = sampler or ModeSampler(basis, grid)
    weights = grid.weights
    q1 = np.zeros(u.samples.shape)
    q2 = np.zeros(u.samples.shape)
    classes = dict((mode.index, correction.mode_class) for mode, correction in basis)
    for item in sampler.sampled:
        if item.mode.is_constant:
            continue
        direction = item.mode.sample_gradient(grid) / item.mode.lambda0
        coefficient = float(np.sum(u.samples * direction * weights))
        if classes[item.mode.index] == ModeClass.I:
            q1 += coefficient * direction
        else:
            q2 += coefficient * direction

    _, q = leray_project(u)
    tail = q.samples - q1 - q2
    tail_norm = float(np.sqrt(np.sum(np.sum(tail**2, axis=0) * weights)))
    tail_bound = float(np.sqrt(dirichlet_energy(u.samples, grid) / basis.next_lambda_squared))
    return QSplit(VectorField(grid, q1), VectorField(grid, q2), tail_norm, tail_bound)
