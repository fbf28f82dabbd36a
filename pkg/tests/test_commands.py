"""Tests for CLI command implementations."""

import json
from contextlib import asynccontextmanager
from pathlib import Path
from types import SimpleNamespace
from unittest.mock import AsyncMock, MagicMock, patch

import pytest
import typer

from src.acoustics.rates import DampingEntry, DampingReport
from src.cli import commands
from src.config.settings import DomainSettings, Settings, WaveSettings
from src.errors import CFLViolationError, ConfigError
from src.harness.acceptance import CriterionResult
from src.harness.compare import NormTable
from src.harness.rates import RateFit
from src.harness.sweep import FAILED, MemberSummary, RateReport
from src.solvers.runner import COMPRESSIBLE, INCOMPRESSIBLE, RunDiagnostics


@asynccontextmanager
async def fake_session_context():
    yield MagicMock()


def make_repository() -> MagicMock:
    repository = MagicMock()
    repository.save = AsyncMock()
    repository.save_summary = AsyncMock()
    repository.save_failure = AsyncMock()
    repository.save_metrics = AsyncMock(return_value=[])
    repository.list_all = AsyncMock(return_value=[])
    return repository


def make_rate_report(*, failed_member: bool = False, acceptance_passed: bool = True) -> RateReport:
    members = [
        MemberSummary(
            epsilon=epsilon,
            run_id=f"hash-eps{epsilon:g}",
            norms=NormTable(u_L2L2=epsilon, d_L2H1=epsilon, grad_d_L4=epsilon),
            diagnostics={"steps": 5, "mass_drift": 0.0},
        )
        for epsilon in (0.2, 0.1, 0.05)
    ]
    if failed_member:
        members[-1] = MemberSummary(epsilon=0.05, status=FAILED, message="CFL violated")
    return RateReport(
        content_hash="a" * 64,
        gamma=2.0,
        kappa=2.0,
        alpha=0.5,
        epsilons=[0.2, 0.1, 0.05],
        condition_h=True,
        reference=MemberSummary(epsilon=0.0, run_id="hash-inc", diagnostics={"steps": 5}),
        members=members,
        norms={"u_L2L2": RateFit(pairs=[(0.2, 0.2), (0.1, 0.1), (0.05, 0.05)], slope=1.0, intercept=0.0, correlation=1.0)},
        acceptance={"6": CriterionResult(number=6, name="energy", passed=acceptance_passed)},
    )


@pytest.fixture(autouse=True)
def reset_output():
    commands._configure_output(False, False)
    yield
    commands._configure_output(False, False)


@pytest.fixture
def patched(small_settings: Settings):
    repository = make_repository()
    with (
        patch("src.cli.commands.get_settings", return_value=small_settings),
        patch("src.cli.commands.get_session", side_effect=lambda url: fake_session_context()),
        patch("src.cli.commands.RunRepository", return_value=repository),
        patch("src.cli.commands.console") as mock_console,
    ):
        yield mock_console, repository


def output_dir(settings: Settings) -> Path:
    return Path(settings.output.dir)


def test_basis_writes_csv(patched, small_settings: Settings) -> None:
    mock_console, _ = patched

    commands.basis(config_file=None, out=None, modes=3, fmt="csv")

    lines = (output_dir(small_settings) / "basis.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    mock_console.print.assert_called()


def test_basis_json_with_out_override(patched, tmp_path: Path) -> None:
    commands.basis(config_file=None, out=str(tmp_path / "elsewhere"), modes=None, fmt="JSON")

    payload = json.loads((tmp_path / "elsewhere" / "basis.json").read_text(encoding="utf-8"))
    assert payload[0]["class"] == "trivial"


def test_basis_invalid_format(patched) -> None:
    with pytest.raises(typer.BadParameter):
        commands.basis(config_file=None, out=None, modes=None, fmt="xml")


def test_basis_config_error_exits_2(patched) -> None:
    with patch("src.cli.commands.get_settings", side_effect=ConfigError("Unknown configuration sections")):
        with pytest.raises(typer.Exit) as exc_info:
            commands.basis(config_file="missing.yaml", out=None, modes=None, fmt="csv")
    assert exc_info.value.exit_code == commands.EXIT_CONFIG


def test_check_h_rectangle(patched, small_settings: Settings) -> None:
    commands.check_h(config_file=None, out=None, modes=None)

    payload = json.loads((output_dir(small_settings) / "condition_h.json").read_text(encoding="utf-8"))
    assert payload["satisfied"] is True


def test_check_h_slab(patched, small_settings: Settings) -> None:
    slab = small_settings.model_copy(update={"domain": DomainSettings(kind="slab1d", Lx=2.0)})
    with patch("src.cli.commands.get_settings", return_value=slab):
        commands.check_h(config_file=None, out=None, modes=4)

    payload = json.loads((output_dir(slab) / "condition_h.json").read_text(encoding="utf-8"))
    assert payload["satisfied"] is False


def test_run_comp_writes_and_catalogs(patched, small_settings: Settings) -> None:
    mock_console, repository = patched

    commands.run_comp(config_file=None, out=None, epsilon=0.2)

    directories = [path for path in output_dir(small_settings).iterdir() if path.is_dir()]
    assert len(directories) == 1
    assert directories[0].name.endswith("-eps0.2")
    assert (directories[0] / "ledger.csv").exists()
    assert (directories[0] / "checkpoints").is_dir()
    repository.save.assert_awaited_once()
    mock_console.print.assert_called()


def test_run_inc_writes_artifacts(patched, small_settings: Settings) -> None:
    _, repository = patched

    commands.run_inc(config_file=None, out=None)

    directories = [path for path in output_dir(small_settings).iterdir() if path.is_dir()]
    assert [path.name[-4:] for path in directories] == ["-inc"]
    assert (directories[0] / "manifest.json").exists()
    repository.save.assert_awaited_once()


def test_run_comp_invalid_epsilon_exits_2(patched) -> None:
    with pytest.raises(typer.Exit) as exc_info:
        commands.run_comp(config_file=None, out=None, epsilon=1.5)
    assert exc_info.value.exit_code == commands.EXIT_CONFIG


def test_run_comp_cfl_violation_exits_3(patched) -> None:
    with patch("src.cli.commands.run", side_effect=CFLViolationError(0.1, 0.01)):
        with pytest.raises(typer.Exit) as exc_info:
            commands.run_comp(config_file=None, out=None, epsilon=None)
    assert exc_info.value.exit_code == commands.EXIT_NUMERICAL


def test_run_comp_catalog_failure_is_warning(patched, small_settings: Settings) -> None:
    mock_console, repository = patched
    repository.save.side_effect = RuntimeError("database locked")

    commands.run_comp(config_file=None, out=None, epsilon=None)

    printed = " ".join(str(arg) for call in mock_console.print.call_args_list for arg in call.args)
    assert "Run not catalogued" in printed


def test_wave_single_mode(patched, small_settings: Settings) -> None:
    settings = small_settings.model_copy(update={"wave": WaveSettings(periods=2.0, mode=[1, 0])})
    with patch("src.cli.commands.get_settings", return_value=settings):
        commands.wave(config_file=None, out=None, epsilon=None, modes=None, suite=False)

    lines = (output_dir(settings) / "modes.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("t,")
    assert len(lines) > 10


def test_wave_constant_mode_rejected(patched, small_settings: Settings) -> None:
    settings = small_settings.model_copy(update={"wave": WaveSettings(mode=[0, 0])})
    with patch("src.cli.commands.get_settings", return_value=settings):
        with pytest.raises(typer.BadParameter):
            commands.wave(config_file=None, out=None, epsilon=None, modes=None, suite=False)


def test_wave_unknown_mode_rejected(patched, small_settings: Settings) -> None:
    settings = small_settings.model_copy(update={"wave": WaveSettings(mode=[9, 9])})
    with patch("src.cli.commands.get_settings", return_value=settings):
        with pytest.raises(typer.BadParameter):
            commands.wave(config_file=None, out=None, epsilon=None, modes=None, suite=False)


def test_wave_suite_writes_report(patched, small_settings: Settings) -> None:
    report = DampingReport(
        mu=1.0,
        entries=[DampingEntry((1, 0), 0.04, 1.0, "I", 0.5, 0.5, 3.0, 1.0)],
    )
    with patch("src.cli.commands.damping_suite", return_value=report) as mock_suite:
        commands.wave(config_file=None, out=None, epsilon=None, modes=None, suite=True)

    mock_suite.assert_called_once()
    payload = json.loads((output_dir(small_settings) / "damping_I.json").read_text(encoding="utf-8"))
    assert payload["modes"][0]["index"] == [1, 0]


def test_sweep_catalogs_members(patched) -> None:
    _, repository = patched
    with patch("src.cli.commands.run_sweep", return_value=make_rate_report()):
        commands.sweep(config_file=None, out=None, workers=None)

    assert repository.save_summary.await_count == 4
    repository.save_failure.assert_not_awaited()
    reference_metrics = repository.save_metrics.await_args_list[0].args
    assert reference_metrics == ("hash-inc", {"slope_u_L2L2": 1.0})


def test_sweep_failed_member_exits_3(patched) -> None:
    _, repository = patched
    with patch("src.cli.commands.run_sweep", return_value=make_rate_report(failed_member=True)):
        with pytest.raises(typer.Exit) as exc_info:
            commands.sweep(config_file=None, out=None, workers=2)

    assert exc_info.value.exit_code == commands.EXIT_NUMERICAL
    repository.save_failure.assert_awaited_once()


def test_sweep_unexpected_error_exits_1(patched) -> None:
    with patch("src.cli.commands.run_sweep", side_effect=RuntimeError("pool died")):
        with pytest.raises(typer.Exit) as exc_info:
            commands.sweep(config_file=None, out=None, workers=None)
    assert exc_info.value.exit_code == commands.EXIT_ERROR


def test_report_without_files(patched) -> None:
    mock_console, _ = patched

    commands.report(config_file=None, out=None, assert_pass=True, compare=None, checks=False, seed=0)

    printed = " ".join(str(arg) for call in mock_console.print.call_args_list for arg in call.args)
    assert "0 passed, 0 failed, 2 not evaluated" in printed


def test_report_assert_failure_exits_4(patched, small_settings: Settings) -> None:
    directory = output_dir(small_settings)
    directory.mkdir(parents=True)
    (directory / "report.json").write_text(make_rate_report(acceptance_passed=False).model_dump_json())

    with pytest.raises(typer.Exit) as exc_info:
        commands.report(config_file=None, out=None, assert_pass=True, compare=None, checks=False, seed=0)
    assert exc_info.value.exit_code == commands.EXIT_ACCEPTANCE


def test_report_runs_self_checks(patched) -> None:
    checks = [CriterionResult(number=1, name="projection", passed=True)]
    with patch("src.cli.commands.self_checks", return_value=checks) as mock_checks:
        commands.report(config_file=None, out=None, assert_pass=True, compare=None, checks=True, seed=7)
    mock_checks.assert_called_once_with(7)


def test_load_rate_report(tmp_path: Path) -> None:
    assert commands.load_rate_report(tmp_path) is None
    (tmp_path / "report.json").write_text(make_rate_report().model_dump_json())

    loaded = commands.load_rate_report(tmp_path)

    assert loaded is not None
    assert loaded.epsilons == [0.2, 0.1, 0.05]
    assert loaded.norms["u_L2L2"].slope == 1.0


def test_load_damping_reports_merges(tmp_path: Path) -> None:
    assert commands.load_damping_reports(tmp_path) is None
    first = DampingReport(mu=1.0, entries=[DampingEntry((1, 0), 0.04, 1.0, "I", 0.5, 0.5, 3.0, 1.0)])
    second = DampingReport(mu=1.0, entries=[DampingEntry((1,), 0.04, 1.0, "J", 0.0, 0.5, 0.6, None)])
    (tmp_path / "damping_I.json").write_text(json.dumps(first.to_dict()))
    (tmp_path / "damping_J.json").write_text(json.dumps(second.to_dict()))

    merged = commands.load_damping_reports(tmp_path)

    assert merged is not None
    assert [entry.mode_class for entry in merged.entries] == ["I", "J"]


def test_runs_invalid_kind() -> None:
    with pytest.raises(typer.BadParameter):
        commands.runs(config_file=None, limit=5, kind="relativistic")


def test_runs_empty_catalog(patched) -> None:
    mock_console, repository = patched

    commands.runs(config_file=None, limit=5, kind="compressible")

    repository.list_all.assert_awaited_once_with(limit=5, kind="compressible")
    mock_console.print.assert_called_once_with("[yellow]No runs catalogued yet[/yellow]")


def test_runs_lists_table(patched) -> None:
    mock_console, repository = patched
    repository.list_all.return_value = [
        SimpleNamespace(
            id="abc-inc",
            kind="incompressible",
            epsilon=None,
            status="completed",
            steps=5,
            energy_drift=1e-9,
            created_at=None,
        )
    ]

    commands.runs(config_file=None, limit=20, kind=None)

    mock_console.print.assert_called_once()


def panel_labels(panel) -> list[str]:
    return [str(cell) for cell in panel.renderable.columns[0].cells]


def test_run_panel_names_velocity_split_masses(tmp_path: Path) -> None:
    result = SimpleNamespace(
        run_id="abc123-eps0.1",
        kind=COMPRESSIBLE,
        diagnostics=RunDiagnostics(steps=5, u1_mass=0.9, u2_mass=0.1),
    )

    labels = panel_labels(commands._run_panel(result, tmp_path))

    assert "Mass of u¹ / u²" in labels
    assert not any("Pu" in label or "Qu" in label for label in labels)


def test_run_panel_reports_divergence_ratio(tmp_path: Path) -> None:
    result = SimpleNamespace(run_id="abc123", kind=INCOMPRESSIBLE, diagnostics=RunDiagnostics(steps=5))

    labels = panel_labels(commands._run_panel(result, tmp_path))

    assert "Divergence / gradient" in labels
    assert "Mass of u¹ / u²" not in labels
