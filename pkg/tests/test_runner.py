"""Tests for the run driver."""

from pathlib import Path

import pytest

from src.config.settings import InitSettings, Settings, TimeSettings
from src.errors import ConfigError
from src.solvers.compressible import CompressibleState
from src.solvers.incompressible import IncompressibleState
from src.solvers.runner import (
    COMPRESSIBLE,
    INCOMPRESSIBLE,
    build_states,
    run,
    run_identifier,
    step_count,
)


def test_step_count():
    """T must be a whole number of steps."""
    assert step_count(0.01, 2e-3) == 5
    with pytest.raises(ConfigError):
        step_count(0.011, 2e-3)
    with pytest.raises(ConfigError):
        step_count(1e-4, 2e-3)


def test_run_identifier():
    """Identifiers carry the hash prefix and the Mach parameter."""
    digest = "abcdef0123456789"
    assert run_identifier(COMPRESSIBLE, digest, 0.05) == "abcdef012345-eps0.05"
    assert run_identifier(INCOMPRESSIBLE, digest) == "abcdef012345-inc"


class TestBuildStates:
    """Tests for build_states."""

    def test_compressible(self, small_settings: Settings):
        """Compressible states start with ρ = 1 + εϕ⁰ and a no-slip velocity."""
        grid, params, state = build_states(small_settings, COMPRESSIBLE)
        assert isinstance(state, CompressibleState)
        assert grid.shape == (17, 17)
        assert params.epsilon == small_settings.params.epsilon
        assert state.u.samples[:, grid.boundary_mask].max() == 0.0

    def test_incompressible(self, small_settings: Settings):
        """Incompressible states hold the projected velocity."""
        _, _, state = build_states(small_settings, INCOMPRESSIBLE)
        assert isinstance(state, IncompressibleState)

    def test_unknown_kind(self, small_settings: Settings):
        """Only the two run kinds exist."""
        with pytest.raises(ConfigError):
            build_states(small_settings, "relativistic")

    def test_negative_initial_density(self, small_settings: Settings):
        """An amplitude that makes ρ⁰ negative is a configuration error."""
        settings = small_settings.model_copy(update={"init": InitSettings(profile="acoustic", amplitude=50.0)})
        with pytest.raises(ConfigError):
            build_states(settings, COMPRESSIBLE)


class TestRun:
    """Tests for complete short runs."""

    def test_compressible_run(self, small_settings: Settings, tmp_path: Path):
        """A five-step run snapshots every step and conserves mass."""
        calls = []
        result = run(
            small_settings,
            COMPRESSIBLE,
            checkpoint_dir=tmp_path / "checkpoints",
            progress=lambda done, total: calls.append((done, total)),
        )
        assert len(result.trajectory) == 6
        assert len(result.ledger) == 6
        assert result.trajectory.times[-1] == pytest.approx(0.01)
        assert calls[-1] == (5, 5)
        assert result.diagnostics.steps == 5
        assert result.diagnostics.mass_drift < 1e-10
        assert result.diagnostics.max_director <= result.diagnostics.director_bound + 1e-8
        assert result.diagnostics.status == "completed"
        assert result.run_id.endswith("-eps0.1")

    def test_compressible_mode_rows(self, small_settings: Settings):
        """Mode rows cover both signs of every retained mode at t = 0."""
        result = run(small_settings, COMPRESSIBLE)
        initial = [row for row in result.mode_rows if row["t"] == 0.0]
        assert {row["sign"] for row in initial} == {"+", "-"}
        assert len(initial) == 2 * (small_settings.modes.count + 1)

    def test_checkpoints(self, small_settings: Settings, tmp_path: Path):
        """Checkpoints cover every second snapshot plus the final state."""
        result = run(small_settings, COMPRESSIBLE, checkpoint_dir=tmp_path)
        steps = sorted({Path(path).stem.split("_")[1] for path in result.checkpoints})
        assert steps == ["000000", "000002", "000004", "000005"]
        assert all(Path(path).exists() for path in result.checkpoints)
        assert {Path(path).stem.split("_")[0] for path in result.checkpoints} == {"d", "rho", "u"}

    def test_incompressible_run(self, small_settings: Settings):
        """Incompressible runs have no density and stay weakly divergence free."""
        result = run(small_settings, INCOMPRESSIBLE)
        assert result.epsilon is None
        assert result.trajectory.rho == []
        assert result.mode_rows == []
        assert result.diagnostics.max_divergence_ratio < 1e-6
        assert result.run_id.endswith("-inc")

    def test_bad_final_time(self, small_settings: Settings):
        """Runs refuse a final time that is not a whole number of steps."""
        settings = small_settings.model_copy(update={"time": TimeSettings(T=0.011, dt=2e-3)})
        with pytest.raises(ConfigError):
            run(settings, COMPRESSIBLE)
