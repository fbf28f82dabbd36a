"""Rich formatters for CLI output."""

from __future__ import annotations

from datetime import datetime
from typing import TYPE_CHECKING, Any, Iterable, Optional

from rich.panel import Panel
from rich.table import Table

if TYPE_CHECKING:
    from src.acoustics.rates import DampingReport
    from src.harness.acceptance import CriterionResult
    from src.harness.sweep import RateReport
    from src.spectral.basis import SpectralBasis


def build_basis_table(basis: "SpectralBasis", *, title: str = "Neumann modes", limit: Optional[int] = None) -> Table:
    """Create a rich table listing eigenpairs and their damping corrections."""
    table = Table(title=title)
    table.add_column("Mode", style="magenta")
    table.add_column("λ", justify="right", style="cyan")
    table.add_column("∫∂Ω Φ²", justify="right")
    table.add_column("Re iλ₁", justify="right")
    table.add_column("Im iλ₁", justify="right")
    table.add_column("Class", justify="center")

    rows = basis.to_rows()
    if limit is not None:
        rows = rows[:limit]
    for row in rows:
        index = (row["m"],) if row.get("n") is None else (row["m"], row["n"])
        table.add_row(
            "(" + ",".join(str(value) for value in index) + ")",
            format_float(row["lambda0"]),
            format_float(row["boundary_integral"]),
            format_float(row["re_lambda1"]),
            format_float(row["im_lambda1"]),
            str(row["class"]),
        )
    return table


def build_runs_table(runs: Iterable[Any], *, title: str = "Catalogued runs") -> Table:
    """Create a rich table for the run catalog."""
    table = Table(title=title)
    table.add_column("ID", style="dim", overflow="fold")
    table.add_column("Kind", style="magenta")
    table.add_column("ε", justify="right")
    table.add_column("Status", justify="center")
    table.add_column("Steps", justify="right")
    table.add_column("Energy drift", justify="right")
    table.add_column("Created", style="cyan")

    for run in runs:
        table.add_row(
            str(getattr(run, "id", "")),
            str(getattr(run, "kind", "")),
            format_float(getattr(run, "epsilon", None)),
            _format_status(getattr(run, "status", None)),
            str(getattr(run, "steps", None) or "-"),
            format_float(getattr(run, "energy_drift", None)),
            _format_datetime(getattr(run, "created_at", None)),
        )
    return table


def build_rate_table(report: "RateReport", *, title: str = "Convergence rates") -> Table:
    """One row per norm: fitted slope, correlation and the values per ε."""
    table = Table(title=title)
    table.add_column("Norm", style="magenta")
    for epsilon in report.epsilons:
        table.add_column(f"ε={epsilon:g}", justify="right")
    table.add_column("Slope", justify="right", style="cyan")
    table.add_column("r", justify="right")

    for name, fit in report.norms.items():
        values = dict(report.series(name))
        cells = [format_float(values.get(epsilon)) for epsilon in report.epsilons]
        if fit.defined:
            slope, correlation = format_float(fit.slope), format_float(fit.correlation)
        else:
            slope, correlation = f"[yellow]{fit.reason or 'undefined'}[/yellow]", "-"
        table.add_row(name, *cells, slope, correlation)
    return table


def build_damping_table(report: "DampingReport", *, title: str = "Acoustic damping") -> Table:
    """Measured envelope rates next to the boundary-layer prediction."""
    table = Table(title=title)
    table.add_column("Mode", style="magenta")
    table.add_column("Class", justify="center")
    table.add_column("ε", justify="right")
    table.add_column("Measured", justify="right", style="cyan")
    table.add_column("Bulk", justify="right")
    table.add_column("Predicted", justify="right")
    table.add_column("Ratio", justify="right")

    for entry in report.entries:
        table.add_row(
            "(" + ",".join(str(value) for value in entry.index) + ")",
            entry.mode_class,
            format_float(entry.epsilon),
            format_float(entry.measured_rate),
            format_float(entry.bulk_rate),
            format_float(entry.predicted_rate),
            format_float(entry.ratio),
        )
    return table


def build_acceptance_table(results: Iterable["CriterionResult"], *, title: str = "Acceptance") -> Table:
    """Create a rich table of criterion outcomes."""
    table = Table(title=title)
    table.add_column("#", justify="right", style="dim")
    table.add_column("Criterion", style="magenta")
    table.add_column("Result", justify="center")
    table.add_column("Detail", overflow="fold")

    for result in sorted(results, key=lambda item: item.number):
        table.add_row(str(result.number), result.name, format_outcome(result.passed), result.detail)
    return table


def build_status_panel(lines: Iterable[tuple[str, str]], *, title: str = "Status") -> Panel:
    """Build a formatted status panel from label/value pairs."""
    table = Table.grid(padding=(0, 1))
    table.add_column(style="bold")
    table.add_column()
    for label, value in lines:
        table.add_row(label, value)
    return Panel.fit(table, title=title, border_style="blue")


def format_float(value: Optional[float]) -> str:
    """Format a measured scalar compactly; missing values render as a dash."""
    if value is None:
        return "-"
    magnitude = abs(value)
    if magnitude != 0 and (magnitude < 1e-3 or magnitude >= 1e4):
        return f"{value:.3e}"
    return f"{value:.4f}"


def format_outcome(passed: Optional[bool]) -> str:
    if passed is None:
        return "[yellow]n/a[/yellow]"
    return "[green]pass[/green]" if passed else "[red]FAIL[/red]"


def _format_status(value: Optional[str]) -> str:
    if value == "completed":
        return "[green]completed[/green]"
    if value is None:
        return "unknown"
    return f"[red]{value}[/red]"


def _format_datetime(value: Optional[datetime]) -> str:
    if isinstance(value, datetime):
        return value.strftime("%Y-%m-%d %H:%M")
    if value is None:
        return "unknown"
    return str(value)
