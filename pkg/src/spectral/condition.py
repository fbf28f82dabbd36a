"""Checker for the overdetermined Neumann problem (condition (H))."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from src.spectral.basis import NeumannMode, SpectralBasis

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class DegeneratePair:
    """Two modes sharing an eigenvalue and their boundary side integral ∫∇Φ_k·∇Φ_l ds."""

    first: tuple[int, ...]
    second: tuple[int, ...]
    lambda_squared: float
    side_integral: float


@dataclass
class ConditionHReport:
    """Result of ``check_condition_H``.

    Condition (H) holds when no nonconstant mode has a constant boundary trace.
    """

    tolerance: float
    trace_spread: dict[tuple[int, ...], float] = field(default_factory=dict)
    violating: list[tuple[int, ...]] = field(default_factory=list)
    degenerate_pairs: list[DegeneratePair] = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return not self.violating

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "tolerance": self.tolerance,
            "violating": [list(index) for index in self.violating],
            "trace_spread": {",".join(map(str, index)): spread for index, spread in self.trace_spread.items()},
            "degenerate_pairs": [
                {
                    "first": list(pair.first),
                    "second": list(pair.second),
                    "lambda_squared": pair.lambda_squared,
                    "side_integral": pair.side_integral,
                }
                for pair in self.degenerate_pairs
            ],
        }


def _side_integral(first: NeumannMode, second: NeumannMode, samples_per_edge: int) -> float:
    points = first.boundary_points(samples_per_edge)
    products = np.sum(first.gradient_at(*points) * second.gradient_at(*points), axis=0)
    if first.domain.is_slab:
        return float(np.sum(products))
    # Four edges of equal sample count; trapezoid along each edge.
    edge_lengths = (first.domain.Lx, first.domain.Lx, first.domain.Ly, first.domain.Ly)
    total = 0.0
    for edge, length in enumerate(edge_lengths):
        values = products[edge * samples_per_edge : (edge + 1) * samples_per_edge]
        h = length / (samples_per_edge - 1)
        total += h * (np.sum(values) - 0.5 * (values[0] + values[-1]))
    return float(total)


def check_condition_H(  # noqa: N802
    basis: SpectralBasis, tol: float = 1e-8, samples_per_edge: int = 257
) -> ConditionHReport:
    """Flag every nonconstant mode whose boundary trace is constant within ``tol``.

    ∂Φ/∂ν = 0 holds by construction for cosine modes, so a constant trace makes the
    mode a nontrivial solution of the overdetermined problem.
    """
    report = ConditionHReport(tolerance=tol)
    nonconstant = [mode for mode, _ in basis.nonconstant]
    for mode in nonconstant:
        trace = mode.boundary_trace(samples_per_edge)
        spread = float(np.max(trace) - np.min(trace))
        report.trace_spread[mode.index] = spread
        if spread <= tol:
            report.violating.append(mode.index)

    for position, first in enumerate(nonconstant):
        for second in nonconstant[position + 1 :]:
            scale = max(1.0, first.lambda_squared)
            if abs(first.lambda_squared - second.lambda_squared) <= DEGENERACY_TOLERANCE * scale:
                report.degenerate_pairs.append(
                    DegeneratePair(
                        first=first.index,
                        second=second.index,
                        lambda_squared=first.lambda_squared,
                        side_integral=_side_integral(first, second, samples_per_edge),
                    )
                )

    if report.satisfied:
        logger.info("Condition (H) holds for %d nonconstant modes", len(nonconstant))
    else:
        logger.info("Condition (H) violated by %d modes", len(report.violating))
    return report
