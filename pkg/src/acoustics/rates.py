"""Envelope damping-rate fits and linearized damping measurements."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from src.acoustics.wave import linearized_wave_run
from src.fields.grid import Grid
from src.fields.models import ScalarField, VectorField
from src.spectral.basis import ModeClass, SpectralBasis

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10
MIN_PEAKS = 3


@dataclass(frozen=True)
class DampingFit:
    """Rate of exponential decay fitted to log|b| against t."""

    rate: float
    used_peaks: bool
    points: int


def fit_damping_rate(times: Sequence[float], magnitudes: Sequence[float]) -> DampingFit:
    """Least-squares slope of log|b| over the envelope.

    Local maxima of |b| form the envelope when there are at least three of them;
    otherwise every sample is used (monotone or constant series).
    """
    t = np.asarray(times, dtype=float)
    values = np.asarray(magnitudes, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise ValueError("times and magnitudes must be 1D arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise ValueError(f"Need at least {MIN_SAMPLES} samples, got {t.size}")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValueError("Magnitudes must be positive and finite")

    peaks, _ = find_peaks(values)
    used_peaks = peaks.size >= MIN_PEAKS
    index = peaks if used_peaks else np.arange(t.size)
    slope, _ = np.polyfit(t[index], np.log(values[index]), 1)
    return DampingFit(rate=float(-slope), used_peaks=used_peaks, points=int(index.size))


@dataclass
class DampingEntry:
    """Measured versus predicted damping of one mode at one ε."""

    index: tuple[int, ...]
    epsilon: float
    lambda0: float
    mode_class: str
    predicted_rate: float
    bulk_rate: float
    measured_rate: float
    ratio: Optional[float]

    def to_dict(self) -> dict:
        data = asdict(self)
        data["index"] = list(self.index)
        data["class"] = data.pop("mode_class")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DampingEntry":
        return cls(
            index=tuple(int(value) for value in data["index"]),
            epsilon=float(data["epsilon"]),
            lambda0=float(data["lambda0"]),
            mode_class=str(data["class"]),
            predicted_rate=float(data["predicted_rate"]),
            bulk_rate=float(data["bulk_rate"]),
            measured_rate=float(data["measured_rate"]),
            ratio=None if data.get("ratio") is None else float(data["ratio"]),
        )


@dataclass
class DampingReport:
    """Damping entries of a linearized suite."""

    mu: float
    entries: list[DampingEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "modes": [entry.to_dict() for entry in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "DampingReport":
        """Inverse of ``to_dict``, used to reload stored suites."""
        return cls(mu=float(data["mu"]), entries=[DampingEntry.from_dict(item) for item in data.get("modes", [])])

    def for_mode(self, index: Sequence[int]) -> list[DampingEntry]:
        target = tuple(index)
        return sorted((entry for entry in self.entries if entry.index == target), key=lambda e: -e.epsilon)


def default_run_length(epsilon: float, lambda0: float, predicted_rate: float, bulk_rate: float) -> float:
    """Long enough for four periods and about 1.5 e-folds of the expected decay."""
    period = 2.0 * math.pi * epsilon / lambda0
    total = predicted_rate + bulk_rate
    decay_time = 1.5 / total if total > 0 else 0.0
    return max(4.0 * period, decay_time)


def measure_damping(
    grid: Grid,
    basis: SpectralBasis,
    index: Sequence[int],
    epsilon: float,
    *,
    T: Optional[float] = None,  # noqa: N803
    steps_per_period: int = 32,
) -> DampingEntry:
    """Start a linearized run from (Φ_k, 0) and fit the envelope decay of |β_k^+|.

    The interior viscous rate μλ²/2 is removed from the measured rate before it
    is compared with the boundary-layer prediction −Re(iλ₁)/√ε.
    """
    mode, correction = basis.find(index)
    if mode.is_constant:
        raise ValueError("The constant mode carries no acoustic oscillation")
    mu = basis.mu
    predicted = -correction.real_part / math.sqrt(epsilon)
    bulk = mu * mode.lambda_squared / 2.0
    run_length = T if T is not None else default_run_length(epsilon, mode.lambda0, predicted, bulk)

    phi0 = ScalarField(grid, mode.sample(grid))
    m0 = VectorField.zeros(grid)
    run = linearized_wave_run(
        phi0, m0, epsilon, mu, run_length, basis=basis, track=[mode.index], steps_per_period=steps_per_period
    )
    times, beta, _ = run.trace(mode.index, 1).arrays()
    fit = fit_damping_rate(times, np.abs(beta))
    boundary_rate = fit.rate - bulk

    ratio = boundary_rate / predicted if correction.mode_class == ModeClass.I and predicted > 0 else None
    logger.info(
        "Mode %s at eps=%.4g: measured %.4f (boundary part %.4f), predicted %.4f",
        mode.label(),
        epsilon,
        fit.rate,
        boundary_rate,
        predicted,
    )
    return DampingEntry(
        index=mode.index,
        epsilon=epsilon,
        lambda0=mode.lambda0,
        mode_class=correction.mode_class.value,
        predicted_rate=predicted,
        bulk_rate=bulk,
        measured_rate=fit.rate,
        ratio=ratio,
    )


def damping_suite(
    grid: Grid, basis: SpectralBasis, index: Sequence[int], epsilons: Sequence[float], steps_per_period: int = 32
) -> DampingReport:
    """``measure_damping`` over a list of ε."""
    report = DampingReport(mu=basis.mu)
    for epsilon in sorted(epsilons, reverse=True):
        report.entries.append(measure_damping(grid, basis, index, epsilon, steps_per_period=steps_per_period))
    return report
