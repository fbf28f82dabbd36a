"""CSV and JSON writers for every artifact the lab produces.

Column orders are fixed and nothing time-dependent is written, so identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Optional, Sequence

from src.acoustics.modes import MODE_COLUMNS
from src.crystal.ledger import LEDGER_COLUMNS

if TYPE_CHECKING:
    from src.acoustics.rates import DampingReport
    from src.config.settings import Settings
    from src.harness.sweep import RateReport
    from src.solvers.runner import RunResult
    from src.spectral.basis import SpectralBasis
    from src.spectral.condition import ConditionHReport

SUPPORTED_FORMATS = {"json", "csv"}
BASIS_COLUMNS = ["m", "n", "lambda0", "boundary_integral", "re_lambda1", "im_lambda1", "class"]
RATE_COLUMNS = ["epsilon", "value"]


def write_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str], output_path: Path) -> Path:
    """Write dict rows with a fixed header."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({column: _format_cell(row.get(column)) for column in columns})
    return output_path


def write_json(data: Any, output_path: Path) -> Path:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8") as handle:
        json.dump(data, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
    return output_path


def _format_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else value


def export_table(rows: list[dict[str, Any]], columns: Sequence[str], output_path: Path, fmt: str = "csv") -> Path:
    """Write rows as CSV or as a JSON list, keeping the column order."""
    format_lower = fmt.lower()
    if format_lower not in SUPPORTED_FORMATS:
        raise ValueError(f"Unsupported export format: {fmt}")
    if format_lower == "json":
        return write_json([{column: row.get(column) for column in columns} for row in rows], output_path)
    return write_csv(rows, columns, output_path)


def export_basis(basis: "SpectralBasis", output_path: Path, fmt: str = "csv") -> Path:
    return export_table(basis.to_rows(), BASIS_COLUMNS, output_path, fmt)


def export_condition(report: "ConditionHReport", output_path: Path) -> Path:
    return write_json(report.to_dict(), output_path)


def export_ledger(rows: Iterable[dict[str, Any]], output_path: Path) -> Path:
    return write_csv(rows, LEDGER_COLUMNS, output_path)


def export_modes(rows: Iterable[dict[str, Any]], output_path: Path) -> Path:
    return write_csv(rows, MODE_COLUMNS, output_path)


def export_damping(report: "DampingReport", output_path: Path) -> Path:
    return write_json(report.to_dict(), output_path)


def export_rate_report(report: "RateReport", directory: Path) -> list[Path]:
    """report.json plus one ``rates_<norm>.csv`` per fitted norm."""
    directory = Path(directory)
    written = [write_json(report.model_dump(mode="json"), directory / "report.json")]
    for name, fit in sorted(report.norms.items()):
        rows = [{"epsilon": eps, "value": value} for eps, value in fit.pairs]
        written.append(write_csv(rows, RATE_COLUMNS, directory / f"rates_{name}.csv"))
    return written


def run_manifest(result: "RunResult", settings: "Settings", files: Optional[Sequence[str]] = None) -> dict[str, Any]:
    """Configuration, content hash, diagnostics and produced files of one run."""
    return {
        "kind": result.kind,
        "run_id": result.run_id,
        "epsilon": result.epsilon,
        "content_hash": result.content_hash,
        "config": settings.hashed_payload(),
        "diagnostics": result.diagnostics.to_dict(),
        "files": sorted(files or []),
    }


def write_run_artifacts(result: "RunResult", settings: "Settings", directory: Path) -> list[Path]:
    """ledger.csv, modes.csv (compressible runs) and manifest.json under ``directory``."""
    directory = Path(directory)
    written = [export_ledger((entry.as_row() for entry in result.ledger), directory / "ledger.csv")]
    if result.mode_rows:
        written.append(export_modes(result.mode_rows, directory / "modes.csv"))
    relative = [path.name for path in written]
    relative += [str(Path(path).relative_to(directory)) for path in result.checkpoints if _is_within(path, directory)]
    written.append(write_json(run_manifest(result, settings, relative), directory / "manifest.json"))
    return written


def _is_within(path: str, directory: Path) -> bool:
    try:
        Path(path).relative_to(directory)
    except ValueError:
        return False
    return True
