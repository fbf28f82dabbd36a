"""Exception hierarchy shared by every NematicLimit package."""

from __future__ import annotations

from typing import Optional


class NematicLimitError(Exception):
    """Base class for all errors raised by NematicLimit."""


class ConfigError(NematicLimitError):
    """Raised when a run or sweep configuration is inconsistent."""


class NumericalAbort(NematicLimitError):
    """Raised when a time integration cannot continue.

    Attributes:
        time: Simulation time at which the run stopped, if known.
    """

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class NegativeDensityError(NumericalAbort):
    """Raised when density stays negative after the maximum number of dt halvings."""


class InstabilityError(NumericalAbort):
    """Raised when the energy ledger grows beyond the configured tolerance."""


class CFLViolationError(NematicLimitError):
    """Raised when a step is attempted with a time step above the stability limit.

    Attributes:
        dt: Requested time step.
        limit: Largest admissible time step for the current state.
    """

    def __init__(self, dt: float, limit: float):
        super().__init__(f"Time step {dt:.3e} exceeds the stability limit {limit:.3e}")
        self.dt = dt
        self.limit = limit


class MisalignedTrajectoryError(NematicLimitError):
    """Raised when two trajectories do not share output times or grids."""


class CompatibilityDefect(NematicLimitError):
    """Raised when a Neumann Poisson right-hand side has a mean beyond tolerance."""


class UnstableModeError(NematicLimitError):
    """Raised when a mode evolution is requested with a growing exponential."""
