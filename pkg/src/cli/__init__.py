"""Command-line interface module."""

from src.cli.commands import app, basis, check_h, main, report, run_comp, run_inc, runs, sweep, wave

__all__ = ["app", "basis", "check_h", "run_comp", "run_inc", "wave", "sweep", "report", "runs", "main"]
