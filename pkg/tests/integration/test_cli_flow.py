"""Integration tests for the sweep, catalog and report commands end to end."""

import json
from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from src.cli.commands import app
from src.config.settings import get_settings
from src.database.repository import RunRepository, get_session
from src.harness.acceptance import check_determinism

runner = CliRunner()


def write_config(tmp_path: Path, name: str) -> Path:
    config = {
        "grid": {"nx": 16, "ny": 16},
        "time": {"T": 0.01, "dt": 0.002, "output_stride": 1, "checkpoint_every": 2},
        "modes": {"count": 4},
        "sweep": {"epsilons": [0.2, 0.1, 0.05], "norms": ["u_L2L2", "d_L2H1"], "refinement_check": False},
        "output": {"dir": str(tmp_path / name)},
        "database": {"url": f"sqlite:///{tmp_path / 'catalog.db'}"},
        "logging": {"level": "WARNING"},
    }
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(config))
    return path


@pytest.fixture(autouse=True)
def cleanup_cache():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_sweep_catalog_and_report(tmp_path: Path) -> None:
    """A sweep writes its report, catalogs every run and feeds the report command."""
    config = write_config(tmp_path, "first")

    sweep = runner.invoke(app, ["sweep", "-c", str(config)])
    assert sweep.exit_code == 0, sweep.output

    report = json.loads((tmp_path / "first" / "report.json").read_text(encoding="utf-8"))
    assert report["epsilons"] == [0.2, 0.1, 0.05]
    assert set(report["norms"]) == {"u_L2L2", "d_L2H1"}

    listing = runner.invoke(app, ["runs", "-c", str(config), "--kind", "compressible"])
    assert listing.exit_code == 0, listing.output

    summary = runner.invoke(app, ["report", "-c", str(config), "--no-checks"])
    assert summary.exit_code == 0, summary.output
    assert "not evaluated" in summary.output


@pytest.fixture
def catalogued_sweep(tmp_path: Path) -> Path:
    """Run a sweep through the CLI and return the catalog database path."""
    config = write_config(tmp_path, "catalogued")
    result = runner.invoke(app, ["sweep", "-c", str(config)])
    assert result.exit_code == 0, result.output
    return tmp_path / "catalog.db"


async def test_sweep_runs_are_catalogued(catalogued_sweep: Path) -> None:
    """The catalog holds the reference, the members and their norms."""
    async with get_session(f"sqlite:///{catalogued_sweep}") as session:
        repository = RunRepository(session)
        runs = await repository.list_all()
        assert len(runs) == 4
        sweep_id = runs[0].sweep_id
        ordered = await repository.list_for_sweep(sweep_id)
        assert [run.epsilon for run in ordered] == [0.2, 0.1, 0.05, None]
        member_metrics = await repository.metrics_for(ordered[0].id)
        reference_metrics = await repository.metrics_for(ordered[-1].id)

    assert member_metrics["u_L2L2"] > 0.0
    assert set(reference_metrics) == {"slope_u_L2L2", "slope_d_L2H1"}


def test_repeated_sweeps_are_identical(tmp_path: Path) -> None:
    """Two sweeps of one configuration leave byte-identical reports."""
    first = write_config(tmp_path, "first")
    second = write_config(tmp_path, "second")
    assert runner.invoke(app, ["sweep", "-c", str(first)]).exit_code == 0
    assert runner.invoke(app, ["sweep", "-c", str(second)]).exit_code == 0

    compared = runner.invoke(
        app, ["report", "-c", str(first), "--no-checks", "--compare", str(tmp_path / "second"), "--assert"]
    )

    assert compared.exit_code in (0, 4), compared.output
    assert check_determinism(tmp_path / "first", tmp_path / "second").passed is True
    for name in ("report.json", "rates_u_L2L2.csv", "rates_d_L2H1.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
