"""Entry point for NematicLimit, the low-Mach limit lab for compressible nematic liquid crystals.

``python -m src.main`` dispatches to the Typer application in ``src.cli``: spectral
checks (``basis``, ``check-h``), single runs (``run-comp``, ``run-inc``), acoustic
experiments (``wave``), ε-sweeps with their report, and the run catalog.
"""

from src.cli import main as cli_main


def main() -> None:
    """Run the NematicLimit command line."""
    cli_main()


if __name__ == "__main__":
    main()
