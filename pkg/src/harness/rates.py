"""Log-log rate fits of norm values against ε."""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

MIN_PAIRS = 3


class RateFit(BaseModel):
    """Least-squares slope of log(value) against log(ε)."""

    pairs: list[tuple[float, float]] = Field(default_factory=list, description="(epsilon, value), decreasing epsilon")
    slope: Optional[float] = None
    intercept: Optional[float] = None
    correlation: Optional[float] = None
    excluded: list[float] = Field(default_factory=list, description="epsilons whose value was not positive")
    reason: Optional[str] = None

    @property
    def defined(self) -> bool:
        return self.slope is not None


def fit_rate(pairs: Sequence[tuple[float, float]]) -> RateFit:
    """Fit value ≈ C·ε^slope.

    Pairs with a nonpositive (or non-finite) value are excluded and listed; the
    slope is left undefined when fewer than three usable pairs remain.
    """
    if len(pairs) < MIN_PAIRS:
        raise ValueError(f"Need at least {MIN_PAIRS} (epsilon, value) pairs, got {len(pairs)}")
    ordered = sorted(((float(eps), float(value)) for eps, value in pairs), key=lambda pair: -pair[0])
    if any(eps <= 0 for eps, _ in ordered):
        raise ValueError("epsilon values must be positive")

    usable = [(eps, value) for eps, value in ordered if value > 0 and math.isfinite(value)]
    excluded = [eps for eps, value in ordered if not (value > 0 and math.isfinite(value))]
    if excluded:
        logger.warning("Excluding nonpositive values at epsilon=%s from the rate fit", excluded)
    if len(usable) < MIN_PAIRS:
        return RateFit(pairs=ordered, excluded=excluded, reason=f"only {len(usable)} positive values")

    log_eps = np.log([eps for eps, _ in usable])
    log_values = np.log([value for _, value in usable])
    slope, intercept = np.polyfit(log_eps, log_values, 1)
    correlation: Optional[float] = None
    if np.ptp(log_values) > 0:
        correlation = float(np.corrcoef(log_eps, log_values)[0, 1])
    return RateFit(
        pairs=ordered,
        slope=float(slope),
        intercept=float(intercept),
        correlation=correlation,
        excluded=excluded,
    )


def undefined_fit(pairs: Sequence[tuple[float, float]], reason: str) -> RateFit:
    """Placeholder fit for norms that cannot be fitted (too few runs, failures)."""
    ordered = sorted(((float(eps), float(value)) for eps, value in pairs), key=lambda pair: -pair[0])
    return RateFit(pairs=ordered, reason=reason)
