"""CLI commands for NematicLimit."""

import asyncio
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, NoReturn, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn

from src.acoustics.rates import DampingReport, damping_suite, fit_damping_rate
from src.acoustics.wave import linearized_wave_run
from src.cli.formatters import (
    build_acceptance_table,
    build_basis_table,
    build_damping_table,
    build_rate_table,
    build_runs_table,
    build_status_panel,
    format_float,
)
from src.config.settings import Settings, get_settings
from src.database.repository import RunRepository, get_session
from src.errors import CFLViolationError, ConfigError, NumericalAbort
from src.fields.grid import Grid
from src.fields.models import ScalarField, VectorField
from src.harness.acceptance import (
    CriterionResult,
    check_determinism,
    evaluate_damping,
    self_checks,
    summarize,
)
from src.harness.exporters import (
    SUPPORTED_FORMATS,
    export_basis,
    export_condition,
    export_damping,
    export_modes,
    write_run_artifacts,
)
from src.harness.rates import RateFit
from src.harness.sweep import FAILED, MemberSummary, RateReport, SweepConfig, member_directory_name, run_sweep
from src.solvers.runner import COMPRESSIBLE, INCOMPRESSIBLE, RunResult, run, run_identifier
from src.spectral.basis import ModeClass, SpectralBasis, build_basis
from src.spectral.condition import check_condition_H
from src.spectral.domain import Domain

app = typer.Typer(help="NematicLimit - low Mach number limit lab for compressible nematic liquid crystals")
console = Console()
logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


@dataclass
class OutputOptions:
    """Track global output flags for the CLI."""

    verbose: bool = False
    quiet: bool = False


_OUTPUT = OutputOptions()

ConfigOption = Annotated[Optional[str], typer.Option("--config", "-c", help="Path to configuration file")]
OutOption = Annotated[Optional[str], typer.Option("--out", "-o", help="Output directory (default: output.dir)")]
EpsilonOption = Annotated[Optional[float], typer.Option("--epsilon", "-e", help="Override the Mach parameter")]
ModesOption = Annotated[Optional[int], typer.Option("--modes", "-n", min=1, help="Override the retained mode count")]


@app.callback()
def main_callback(
    verbose: Annotated[bool, typer.Option("--verbose", help="Show verbose output")] = False,
    quiet: Annotated[bool, typer.Option("--quiet", help="Suppress non-essential output")] = False,
) -> None:
    """Configure global CLI output."""
    _configure_output(verbose, quiet)


def _configure_output(verbose: bool, quiet: bool) -> None:
    if verbose and quiet:
        raise typer.BadParameter("Choose only one of --verbose or --quiet.")
    _OUTPUT.verbose = verbose
    _OUTPUT.quiet = quiet


def _setup_logging(settings: Settings) -> None:
    settings.setup_logging()
    root_logger = logging.getLogger()
    if _OUTPUT.verbose:
        root_logger.setLevel(logging.DEBUG)
    if _OUTPUT.quiet:
        root_logger.setLevel(logging.ERROR)


def _console_print(*args, level: str = "info") -> None:
    if _OUTPUT.quiet and level not in {"error", "summary"}:
        return
    console.print(*args)


def _render_error(action: str, message: str, exc: Exception) -> None:
    logger.exception("%s failed", action)
    _console_print(
        Panel.fit(
            f"✗ {message}\n\n{str(exc)}",
            title="Error",
            border_style="red",
        ),
        level="error",
    )


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ValidationError, ConfigError)):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalAbort, CFLViolationError)):
        return EXIT_NUMERICAL
    return EXIT_ERROR


def _fail(action: str, exc: Exception) -> NoReturn:
    code = _exit_code(exc)
    if code == EXIT_CONFIG:
        message = f"Invalid configuration for {action.lower()}"
    elif code == EXIT_NUMERICAL:
        message = f"{action} aborted by the numerical safeguards"
    else:
        message = f"Unexpected error during {action.lower()}"
    _render_error(action, message, exc)
    raise typer.Exit(code=code)


def _load_settings(
    config_file: Optional[str],
    *,
    epsilon: Optional[float] = None,
    modes: Optional[int] = None,
    out: Optional[str] = None,
) -> Settings:
    """Settings from the config file with command-line overrides applied."""
    settings = get_settings(Path(config_file)) if config_file else get_settings()
    if epsilon is not None:
        settings = settings.with_epsilon(epsilon)
    if modes is not None:
        settings = settings.model_copy(update={"modes": settings.modes.model_copy(update={"count": modes})})
    if out is not None:
        settings = settings.with_output_dir(out)
    return settings


def _basis_for(settings: Settings) -> tuple[Domain, SpectralBasis]:
    domain = Domain.from_settings(settings.domain)
    return domain, build_basis(domain, settings.modes.count, settings.params.mu)


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=console,
        disable=_OUTPUT.quiet,
    )


@app.command()
def basis(
    config_file: ConfigOption = None,
    out: OutOption = None,
    modes: ModesOption = None,
    fmt: Annotated[str, typer.Option("--format", "-f", help="Output format: csv or json")] = "csv",
) -> None:
    """Enumerate the Neumann eigenbasis and its damping corrections."""
    try:
        fmt = fmt.lower()
        if fmt not in SUPPORTED_FORMATS:
            raise typer.BadParameter("Format must be 'csv' or 'json'.")
        settings = _load_settings(config_file, modes=modes, out=out)
        _setup_logging(settings)
        _, spectral_basis = _basis_for(settings)
        target = export_basis(spectral_basis, Path(settings.output.dir) / f"basis.{fmt}", fmt)

        _console_print(build_basis_table(spectral_basis))
        _console_print(f"[green]✓ Wrote {len(spectral_basis)} modes to {target}[/green]", level="summary")
    except typer.BadParameter:
        raise
    except Exception as e:
        _fail("Basis", e)


@app.command("check-h")
def check_h(
    config_file: ConfigOption = None,
    out: OutOption = None,
    modes: ModesOption = None,
) -> None:
    """Check that no retained mode has a constant boundary trace."""
    try:
        settings = _load_settings(config_file, modes=modes, out=out)
        _setup_logging(settings)
        _, spectral_basis = _basis_for(settings)
        report = check_condition_H(spectral_basis, tol=settings.modes.h_tolerance)
        target = export_condition(report, Path(settings.output.dir) / "condition_h.json")

        violating = ", ".join("(" + ",".join(map(str, index)) + ")" for index in report.violating) or "none"
        _console_print(
            build_status_panel(
                [
                    ("Satisfied", "[green]yes[/green]" if report.satisfied else "[red]no[/red]"),
                    ("Tolerance", f"{report.tolerance:.1e}"),
                    ("Violating modes", violating),
                    ("Degenerate pairs", str(len(report.degenerate_pairs))),
                    ("Report", str(target)),
                ],
                title="Boundary trace condition",
            ),
            level="summary",
        )
    except typer.BadParameter:
        raise
    except Exception as e:
        _fail("Condition check", e)


@app.command("run-comp")
def run_comp(
    config_file: ConfigOption = None,
    out: OutOption = None,
    epsilon: EpsilonOption = None,
) -> None:
    """Integrate the compressible system at one Mach parameter."""
    _run_command(COMPRESSIBLE, config_file, out, epsilon)


@app.command("run-inc")
def run_inc(
    config_file: ConfigOption = None,
    out: OutOption = None,
) -> None:
    """Integrate the incompressible limit system."""
    _run_command(INCOMPRESSIBLE, config_file, out, None)


def _run_command(kind: str, config_file: Optional[str], out: Optional[str], epsilon: Optional[float]) -> None:
    try:
        settings = _load_settings(config_file, epsilon=epsilon, out=out)
        _setup_logging(settings)
        settings.ensure_directories()
        run_epsilon = settings.params.epsilon if kind == COMPRESSIBLE else None
        directory = Path(settings.output.dir) / run_identifier(kind, settings.content_hash(), run_epsilon)

        with _progress() as progress:
            task = progress.add_task(description=f"Running {kind} solver...", total=None)

            def on_step(done: int, total: int) -> None:
                progress.update(task, completed=done, total=total)

            result = run(settings, kind, checkpoint_dir=directory / "checkpoints", progress=on_step)
        write_run_artifacts(result, settings, directory)
        asyncio.run(_catalog_result(settings, result, directory))

        _console_print(_run_panel(result, directory), level="summary")
    except typer.BadParameter:
        raise
    except Exception as e:
        _fail("Run", e)


def _run_panel(result: RunResult, directory: Path) -> Panel:
    diagnostics = result.diagnostics
    lines = [
        ("Run", result.run_id),
        ("Steps", str(diagnostics.steps)),
        ("Final time", format_float(diagnostics.final_time)),
        ("Mass drift", format_float(diagnostics.mass_drift)),
        ("max |d|", f"{format_float(diagnostics.max_director)} (bound {format_float(diagnostics.director_bound)})"),
        ("Energy drift", format_float(diagnostics.energy_drift)),
    ]
    if result.kind == INCOMPRESSIBLE:
        lines.append(("Divergence / gradient", format_float(diagnostics.max_divergence_ratio)))
    else:
        lines.append(("Mass of u¹ / u²", f"{format_float(diagnostics.u1_mass)} / {format_float(diagnostics.u2_mass)}"))
    lines.append(("Artifacts", str(directory)))
    return build_status_panel(lines, title="Run complete")


async def _catalog_result(settings: Settings, result: RunResult, directory: Path) -> None:
    try:
        async with get_session(settings.database.url) as session:
            repository = RunRepository(session)
            await repository.save(result, out_dir=str(directory))
    except Exception as exc:
        logger.warning("Could not catalog run %s: %s", result.run_id, exc)
        _console_print(f"[yellow]Run not catalogued: {exc}[/yellow]")


@app.command()
def wave(
    config_file: ConfigOption = None,
    out: OutOption = None,
    epsilon: EpsilonOption = None,
    modes: ModesOption = None,
    suite: Annotated[bool, typer.Option("--suite", help="Measure damping over wave.suite_epsilons")] = False,
) -> None:
    """Run the linearized acoustic system from a single eigenmode."""
    try:
        settings = _load_settings(config_file, epsilon=epsilon, modes=modes, out=out)
        _setup_logging(settings)
        settings.ensure_directories()
        domain, spectral_basis = _basis_for(settings)
        grid = Grid(domain, settings.grid.nx, settings.grid.ny)
        index = tuple(settings.wave.mode[: domain.dim])
        try:
            mode, correction = spectral_basis.find(index)
        except KeyError as exc:
            raise typer.BadParameter(str(exc)) from exc
        if mode.is_constant:
            raise typer.BadParameter("The constant mode carries no acoustic oscillation.")

        output_dir = Path(settings.output.dir)
        if suite:
            with _progress() as progress:
                progress.add_task(description=f"Damping suite for mode {mode.label()}...", total=None)
                report = damping_suite(
                    grid, spectral_basis, index, settings.wave.suite_epsilons, settings.wave.steps_per_period
                )
            target = export_damping(report, output_dir / f"damping_{correction.mode_class.value}.json")
            _console_print(build_damping_table(report))
            _console_print(f"[green]✓ Wrote damping report to {target}[/green]", level="summary")
            return

        run_epsilon = settings.params.epsilon
        T = settings.wave.periods * 2.0 * math.pi * run_epsilon / mode.lambda0  # noqa: N806
        result = linearized_wave_run(
            ScalarField(grid, mode.sample(grid)),
            VectorField.zeros(grid),
            run_epsilon,
            settings.params.mu,
            T,
            basis=spectral_basis,
            track=[index],
            steps_per_period=settings.wave.steps_per_period,
        )
        rows = [row for sign in (1, -1) for row in result.trace(index, sign).rows()]
        rows.sort(key=lambda row: (row["t"], row["sign"]))
        target = export_modes(rows, output_dir / "modes.csv")

        times, beta, _ = result.trace(index, 1).arrays()
        measured = fit_damping_rate(times, abs(beta)).rate
        predicted = -correction.real_part / math.sqrt(run_epsilon)
        _console_print(
            build_status_panel(
                [
                    ("Mode", f"{mode.label()} class {correction.mode_class.value}"),
                    ("ε", format_float(run_epsilon)),
                    ("Steps", str(len(result.times) - 1)),
                    ("Energy ratio", format_float(result.energy[-1] / result.energy[0])),
                    ("Measured rate", format_float(measured)),
                    ("Bulk rate μλ²/2", format_float(settings.params.mu * mode.lambda_squared / 2.0)),
                    ("Boundary prediction", format_float(predicted)),
                    ("Traces", str(target)),
                ],
                title="Linearized wave run",
            ),
            level="summary",
        )
    except typer.BadParameter:
        raise
    except Exception as e:
        _fail("Wave run", e)


@app.command()
def sweep(
    config_file: ConfigOption = None,
    out: OutOption = None,
    workers: Annotated[Optional[int], typer.Option("--workers", "-w", min=1, help="Parallel member runs")] = None,
) -> None:
    """Run the incompressible reference and every ε-run, then fit convergence rates."""
    try:
        settings = _load_settings(config_file, out=out)
        if workers is not None:
            settings = settings.model_copy(update={"sweep": settings.sweep.model_copy(update={"workers": workers})})
        _setup_logging(settings)
        settings.ensure_directories()
        config = SweepConfig.from_settings(settings)
        output_dir = Path(settings.output.dir)

        with _progress() as progress:
            task = progress.add_task(description="Sweeping ε...", total=len(config.epsilons))

            def on_member(summary: MemberSummary) -> None:
                progress.advance(task)

            report = run_sweep(config, output_dir, on_member=on_member)
        asyncio.run(_catalog_sweep(config, report, output_dir))

        _console_print(build_rate_table(report))
        failures = [member for member in [report.reference, *report.members] if member.status == FAILED]
        for member in failures:
            label = "reference" if member is report.reference else f"ε={member.epsilon:g}"
            _console_print(f"[red]✗ {label}: {member.message}[/red]", level="error")
        _console_print(f"[green]✓ Wrote report to {output_dir / 'report.json'}[/green]", level="summary")
        if failures:
            raise typer.Exit(code=EXIT_NUMERICAL)
    except (typer.BadParameter, typer.Exit):
        raise
    except Exception as e:
        _fail("Sweep", e)


async def _catalog_sweep(config: SweepConfig, report: RateReport, output_dir: Path) -> None:
    """Register the reference and member runs with their norms and the fitted slopes."""
    sweep_id = report.content_hash[:12]
    try:
        async with get_session(config.base.database.url) as session:
            repository = RunRepository(session)
            reference_id = await _catalog_member(
                repository, report.reference, INCOMPRESSIBLE, config.base, output_dir / "reference", sweep_id
            )
            await repository.save_metrics(reference_id, _slope_metrics(report.norms))
            for member in report.members:
                member_settings = config.member(member.epsilon)
                member_id = await _catalog_member(
                    repository,
                    member,
                    COMPRESSIBLE,
                    member_settings,
                    output_dir / member_directory_name(member.epsilon),
                    sweep_id,
                )
                if member.norms is not None:
                    await repository.save_metrics(member_id, member.norms.model_dump())
    except Exception as exc:
        logger.warning("Could not catalog sweep %s: %s", sweep_id, exc)
        _console_print(f"[yellow]Sweep not catalogued: {exc}[/yellow]")


async def _catalog_member(
    repository: RunRepository,
    member: MemberSummary,
    kind: str,
    settings: Settings,
    directory: Path,
    sweep_id: str,
) -> str:
    content_hash = settings.content_hash()
    epsilon = member.epsilon if kind == COMPRESSIBLE else None
    run_id = member.run_id or run_identifier(kind, content_hash, epsilon)
    if member.status == FAILED:
        await repository.save_failure(run_id, kind, content_hash, member.message, epsilon=epsilon, sweep_id=sweep_id)
    else:
        await repository.save_summary(
            run_id, kind, content_hash, member.diagnostics, epsilon=epsilon, out_dir=str(directory), sweep_id=sweep_id
        )
    return run_id


def _slope_metrics(norms: dict[str, RateFit]) -> dict[str, Optional[float]]:
    return {f"slope_{name}": fit.slope for name, fit in norms.items()}


@app.command()
def report(
    config_file: ConfigOption = None,
    out: OutOption = None,
    assert_pass: Annotated[bool, typer.Option("--assert", help="Exit with code 4 when a criterion fails")] = False,
    compare: Annotated[
        Optional[str], typer.Option("--compare", help="Second sweep directory for the determinism check")
    ] = None,
    checks: Annotated[bool, typer.Option("--checks/--no-checks", help="Run the built-in numerical self-checks")] = True,
    seed: Annotated[int, typer.Option("--seed", help="Seed of the randomized self-checks")] = 0,
) -> None:
    """Evaluate acceptance criteria from stored sweep and damping reports."""
    try:
        settings = _load_settings(config_file, out=out)
        _setup_logging(settings)
        directory = Path(settings.output.dir)
        results: list[CriterionResult] = []

        rate_report = load_rate_report(directory)
        if rate_report is None:
            _console_print(f"[yellow]No report.json in {directory}; sweep criteria not evaluated[/yellow]")
        else:
            _console_print(build_rate_table(rate_report))
            results.extend(rate_report.acceptance.values())

        damping = load_damping_reports(directory)
        if damping is not None:
            _console_print(build_damping_table(damping))
        results.append(evaluate_damping(damping, ModeClass.I))
        results.append(evaluate_damping(damping, ModeClass.J))

        if checks:
            with _progress() as progress:
                progress.add_task(description="Running self-checks...", total=None)
                results.extend(self_checks(seed))
        if compare:
            results.append(check_determinism(directory, Path(compare)))

        passed, failed, unevaluated = summarize(results)
        _console_print(build_acceptance_table(results))
        _console_print(
            f"[bold]{passed} passed, {failed} failed, {unevaluated} not evaluated[/bold]",
            level="summary",
        )
        if assert_pass and failed:
            raise typer.Exit(code=EXIT_ACCEPTANCE)
    except (typer.BadParameter, typer.Exit):
        raise
    except Exception as e:
        _fail("Report", e)


def load_rate_report(directory: Path) -> Optional[RateReport]:
    """report.json of a sweep directory, or None when absent."""
    path = Path(directory) / "report.json"
    if not path.exists():
        return None
    return RateReport.model_validate_json(path.read_text(encoding="utf-8"))


def load_damping_reports(directory: Path) -> Optional[DampingReport]:
    """Merge every damping_*.json of a directory into one report."""
    paths = sorted(Path(directory).glob("damping_*.json"))
    if not paths:
        return None
    reports = [DampingReport.from_dict(json.loads(path.read_text(encoding="utf-8"))) for path in paths]
    return DampingReport(mu=reports[0].mu, entries=[entry for item in reports for entry in item.entries])


@app.command()
def runs(
    config_file: ConfigOption = None,
    limit: Annotated[int, typer.Option("--limit", "-l", min=1, help="Maximum rows to show")] = 20,
    kind: Annotated[Optional[str], typer.Option("--kind", help="compressible or incompressible")] = None,
) -> None:
    """List catalogued runs."""
    if kind is not None and kind not in (COMPRESSIBLE, INCOMPRESSIBLE):
        raise typer.BadParameter("Kind must be 'compressible' or 'incompressible'.")
    asyncio.run(_runs_async(config_file, limit, kind))


async def _runs_async(config_file: Optional[str], limit: int, kind: Optional[str]) -> None:
    try:
        settings = _load_settings(config_file)
        _setup_logging(settings)
        async with get_session(settings.database.url) as session:
            repository = RunRepository(session)
            catalogued = await repository.list_all(limit=limit, kind=kind)
        if not catalogued:
            _console_print("[yellow]No runs catalogued yet[/yellow]", level="summary")
            return
        _console_print(build_runs_table(catalogued))
    except Exception as e:
        _fail("Listing runs", e)


def main() -> None:
    """Main entry point for CLI."""
    app()


if __name__ == "__main__":
    main()
