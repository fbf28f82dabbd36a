"""Acceptance-scale numerical checks; run with ``pytest -m slow``."""

import math
from pathlib import Path

import numpy as np
import pytest

from src.acoustics.duhamel import duhamel_solve
from src.acoustics.modes import ModeSampler, acoustic_forcing, mode_amplitudes
from src.acoustics.rates import damping_suite
from src.acoustics.wave import wave_state_from
from src.config.settings import GridSettings, ModesSettings, Settings, SweepSettings, TimeSettings, WaveSettings
from src.crystal.params import ModelParams
from src.fields.grid import Grid
from src.fields.models import DirectorField, ScalarField, VectorField
from src.harness.acceptance import (
    check_invariants,
    check_oscillation,
    check_projection_algebra,
    check_spectral,
    evaluate_damping,
)
from src.harness.sweep import COMPLETED, SweepConfig, run_sweep
from src.solvers.compressible import CompressibleSolver, CompressibleState, NumericsOptions
from src.spectral.basis import ModeClass, build_basis, eigenpair
from src.spectral.domain import Domain

pytestmark = pytest.mark.slow


def test_projection_algebra() -> None:
    assert check_projection_algebra().passed is True


def test_spectral_correctness() -> None:
    result = check_spectral()
    assert result.passed is True, result.detail


def test_oscillation_cancellation() -> None:
    result = check_oscillation()
    assert result.passed is True, result.detail


def test_invariant_suite() -> None:
    result = check_invariants()
    assert result.passed is True, result.detail


def test_rectangle_mode_damping_constant() -> None:
    """The (1,0) mode of the π-square decays at the boundary-layer rate."""
    grid = Grid(Domain.rectangle(), 64)
    basis = build_basis(grid.domain, 8)

    report = damping_suite(grid, basis, (1, 0), WaveSettings().suite_epsilons)

    result = evaluate_damping(report, ModeClass.I)
    assert result.passed is True, result.detail


def test_slab_mode_is_not_boundary_damped() -> None:
    """The first slab mode keeps an ε-independent rate."""
    grid = Grid(Domain.slab(), 256)
    basis = build_basis(grid.domain, 4)

    report = damping_suite(grid, basis, (1,), WaveSettings().suite_epsilons)

    result = evaluate_damping(report, ModeClass.J)
    assert result.passed is True, result.detail


def test_sweep_on_refined_grid(tmp_path: Path) -> None:
    """A four-member sweep on 32² completes and fits every requested norm."""
    settings = Settings(
        grid=GridSettings(nx=32, ny=32),
        time=TimeSettings(T=0.1, dt=1e-3, output_stride=10, checkpoint_every=5),
        modes=ModesSettings(count=16),
        sweep=SweepSettings(epsilons=[0.2, 0.1, 0.05, 0.025], refinement_check=True),
    )

    report = run_sweep(SweepConfig.from_settings(settings), tmp_path)

    assert all(member.status == COMPLETED for member in report.members)
    assert all(fit.defined for fit in report.norms.values())
    assert report.refinement_floor is not None
    assert report.acceptance["6"].passed is True


def test_compressible_mode_follows_duhamel_prediction() -> None:
    """A small acoustic pulse tracks the mode ODE over one acoustic period within 5%."""
    grid = Grid(Domain.slab(), 64)
    basis = build_basis(grid.domain, 4)
    sampler = ModeSampler(basis, grid)
    params = ModelParams(epsilon=0.04, mu=0.01)
    mode = eigenpair(grid.domain, (1,))
    director = np.zeros((3,) + grid.shape)
    director[2] = 1.0
    state = CompressibleState(
        t=0.0,
        rho=ScalarField(grid, 1.0 + 0.01 * params.epsilon * mode.sample(grid)),
        u=VectorField.zeros(grid),
        d=DirectorField(grid, director),
        params=params,
        boundary=DirectorField(grid, director),
    )
    solver = CompressibleSolver(grid, params, NumericsOptions(acoustic_theta=0.5, filter=0.0))
    period = 2.0 * math.pi * params.acoustic_epsilon / mode.lambda0
    steps = 400
    key = ((1,), 1)

    times, amplitudes, forcing = [], [], []
    for step_index in range(steps + 1):
        if step_index:
            state = solver.step(state, period / steps)
        times.append(state.t)
        amplitudes.append(mode_amplitudes(wave_state_from(state), basis, sampler)[key])
        forcing.append(acoustic_forcing(state, basis, sampler=sampler)[key])

    measured = np.array(amplitudes)
    predicted = duhamel_solve(measured[0], 1j * mode.lambda0, np.array(forcing), params.acoustic_epsilon, times)

    assert abs(measured[0]) == pytest.approx(0.01 * params.sound_speed, rel=1e-6)
    assert np.max(np.abs(measured - predicted)) <= 0.05 * abs(measured[0])
    assert abs(measured[-1] - measured[0]) <= 0.05 * abs(measured[0])
