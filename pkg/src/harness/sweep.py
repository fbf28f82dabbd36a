"""ε sweeps: compressible runs paired against the incompressible reference."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import BaseModel, Field, field_validator

from src.config.settings import NORM_NAMES, Settings
from src.crystal.params import ModelParams
from src.errors import ConfigError, NematicLimitError
from src.harness.acceptance import CriterionResult, evaluate_sweep
from src.harness.compare import NormTable, compare_to_limit
from src.harness.exporters import export_rate_report, write_run_artifacts
from src.harness.rates import MIN_PAIRS, RateFit, fit_rate, undefined_fit
from src.solvers.runner import COMPRESSIBLE, INCOMPRESSIBLE, RunResult, Trajectory, run
from src.spectral.basis import SpectralBasis, build_basis
from src.spectral.condition import check_condition_H
from src.spectral.domain import Domain

logger = logging.getLogger(__name__)

COMPLETED = "completed"
FAILED = "failed"


class SweepConfig(BaseModel):
    """A base configuration and the ε values it is run at."""

    base: Settings
    epsilons: list[float]
    norms: list[str] = Field(default_factory=lambda: list(NORM_NAMES))
    workers: int = Field(default=1, ge=1)
    refinement_check: bool = True

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("At least one epsilon is required")
        if any(not 0 < eps < 1 for eps in v):
            raise ValueError(f"Every epsilon must lie in (0, 1), got {v}")
        if len(set(v)) != len(v):
            raise ValueError(f"Epsilons must be distinct, got {v}")
        return sorted(v, reverse=True)

    @field_validator("norms")
    @classmethod
    def validate_norms(cls, v: list[str]) -> list[str]:
        unknown = [name for name in v if name not in NORM_NAMES]
        if unknown:
            raise ValueError(f"Unknown norms: {unknown}. Must be among {NORM_NAMES}")
        return v

    @classmethod
    def from_settings(cls, settings: Settings) -> "SweepConfig":
        return cls(
            base=settings,
            epsilons=settings.sweep.epsilons,
            norms=settings.sweep.norms,
            workers=settings.sweep.workers,
            refinement_check=settings.sweep.refinement_check,
        )

    def member(self, epsilon: float) -> Settings:
        return self.base.with_epsilon(epsilon)


class MemberSummary(BaseModel):
    """Outcome of one ε-run."""

    epsilon: float
    run_id: Optional[str] = None
    status: str = COMPLETED
    message: str = ""
    norms: Optional[NormTable] = None
    diagnostics: dict[str, Any] = Field(default_factory=dict)


class RateReport(BaseModel):
    """Everything a sweep measured, in a deterministic layout."""

    content_hash: str
    gamma: float
    kappa: float
    alpha: float
    epsilons: list[float]
    condition_h: bool
    reference: MemberSummary
    members: list[MemberSummary] = Field(default_factory=list)
    norms: dict[str, RateFit] = Field(default_factory=dict)
    refinement_floor: Optional[float] = None
    damping: list[dict[str, Any]] = Field(default_factory=list)
    acceptance: dict[str, CriterionResult] = Field(default_factory=dict)

    def completed(self) -> list[MemberSummary]:
        return [member for member in self.members if member.status == COMPLETED and member.norms is not None]

    def series(self, norm: str) -> list[tuple[float, float]]:
        """(ε, value) of one norm over completed members, decreasing ε."""
        pairs = []
        for member in self.completed():
            value = member.norms.value(norm) if member.norms else None
            if value is not None:
                pairs.append((member.epsilon, value))
        return sorted(pairs, key=lambda pair: -pair[0])


@dataclass
class _Outcome:
    epsilon: Optional[float]
    result: Optional[RunResult]
    error: Optional[str]


def _run_member(settings: Settings, kind: str, directory: Optional[str]) -> _Outcome:
    """One run inside a worker; numerical aborts become annotations."""
    epsilon = settings.params.epsilon if kind == COMPRESSIBLE else None
    try:
        checkpoint_dir = Path(directory) / "checkpoints" if directory else None
        result = run(settings, kind, checkpoint_dir=checkpoint_dir)
        if directory:
            write_run_artifacts(result, settings, Path(directory))
        return _Outcome(epsilon, result, None)
    except NematicLimitError as exc:
        logger.warning("%s run at eps=%s aborted: %s", kind, epsilon, exc)
        return _Outcome(epsilon, None, f"{type(exc).__name__}: {exc}")


def _member_dir(out_dir: Optional[Path], name: str) -> Optional[str]:
    return str(out_dir / name) if out_dir is not None else None


def member_directory_name(epsilon: float) -> str:
    return f"eps_{epsilon:.6g}"


def _restricted(fine: Trajectory, factor: int = 2) -> Trajectory:
    coarse_grid = fine.grid.coarsened(factor)
    return Trajectory(
        kind=fine.kind,
        grid=coarse_grid,
        epsilon=fine.epsilon,
        times=list(fine.times),
        u=[fine.grid.restrict(u, factor) for u in fine.u],
        d=[fine.grid.restrict(d, factor) for d in fine.d],
        rho=[fine.grid.restrict(rho, factor) for rho in fine.rho],
    )


def refinement_floor(config: SweepConfig, reference: Trajectory) -> Optional[float]:
    """‖d_h − d_{2h}‖ in L²(H¹) on the coarse nodes, from a half-resolution reference run."""
    grid = reference.grid
    if any(count % 2 for count in grid.cells):
        logger.warning("Grid %s cannot be halved; skipping the refinement floor", grid.cells)
        return None
    ny = grid.ny // 2 if grid.ny is not None else config.base.grid.ny
    try:
        coarse_settings = config.base.with_grid(grid.nx // 2, ny)
        coarse = run(coarse_settings, INCOMPRESSIBLE)
    except (NematicLimitError, ValueError) as exc:
        logger.warning("Refinement run failed: %s", exc)
        return None
    return compare_to_limit(_restricted(reference), coarse.trajectory).d_L2H1


def _damping_predictions(basis: SpectralBasis, epsilons: list[float]) -> list[dict[str, Any]]:
    """Boundary-layer damping rate −Re(iλ₁)/√ε predicted for every retained mode."""
    rows = []
    for mode, correction in basis.nonconstant:
        rows.append(
            {
                "index": list(mode.index),
                "lambda0": mode.lambda0,
                "class": correction.mode_class.value,
                "predicted_rate": {f"{eps:.6g}": -correction.real_part / math.sqrt(eps) for eps in epsilons},
            }
        )
    return rows


def _fit(norm: str, pairs: list[tuple[float, float]]) -> RateFit:
    if len(pairs) < MIN_PAIRS:
        return undefined_fit(pairs, f"{len(pairs)} completed runs; at least {MIN_PAIRS} needed")
    return fit_rate(pairs)


def run_sweep(
    config: SweepConfig,
    out_dir: Optional[Path] = None,
    on_member: Optional[Callable[[MemberSummary], None]] = None,
) -> RateReport:
    """Run the incompressible reference once and every ε-run, then fit the rates.

    Member runs go to a process pool when ``workers`` > 1. A failed member is kept
    in the report with its error message; its norms are left out of the fits.
    When ``out_dir`` is given, run artifacts, report.json and rates_<norm>.csv are
    written there.
    """
    if config.base.params.gamma <= 1.5:
        raise ConfigError("Sweeps require gamma > 3/2")
    out_dir = Path(out_dir) if out_dir is not None else None
    params = ModelParams.from_settings(config.base.params)
    domain = Domain.from_settings(config.base.domain)
    basis = build_basis(domain, config.base.modes.count, params.mu)
    condition = check_condition_H(basis, tol=config.base.modes.h_tolerance)

    logger.info("Sweep over eps=%s with %d worker(s)", config.epsilons, config.workers)
    reference_outcome = _run_member(config.base, INCOMPRESSIBLE, _member_dir(out_dir, "reference"))
    reference = MemberSummary(epsilon=0.0)
    if reference_outcome.result is None:
        reference.status = FAILED
        reference.message = reference_outcome.error or ""
    else:
        reference.run_id = reference_outcome.result.run_id
        reference.diagnostics = reference_outcome.result.diagnostics.to_dict()

    jobs = [(config.member(eps), COMPRESSIBLE, _member_dir(out_dir, member_directory_name(eps))) for eps in config.epsilons]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(executor.map(_run_member, *zip(*jobs)))
    else:
        outcomes = [_run_member(*job) for job in jobs]

    members = []
    for outcome in outcomes:
        summary = MemberSummary(epsilon=float(outcome.epsilon or 0.0))
        if outcome.result is None:
            summary.status = FAILED
            summary.message = outcome.error or ""
        else:
            summary.run_id = outcome.result.run_id
            summary.diagnostics = outcome.result.diagnostics.to_dict()
            if reference_outcome.result is None:
                summary.message = "reference run failed; no difference norms"
            else:
                summary.norms = compare_to_limit(
                    outcome.result.trajectory,
                    reference_outcome.result.trajectory,
                    gamma=params.gamma,
                    basis=basis,
                )
        members.append(summary)
        if on_member is not None:
            on_member(summary)

    report = RateReport(
        content_hash=config.base.content_hash(),
        gamma=params.gamma,
        kappa=params.kappa,
        alpha=params.alpha,
        epsilons=config.epsilons,
        condition_h=condition.satisfied,
        reference=reference,
        members=sorted(members, key=lambda member: -member.epsilon),
        damping=_damping_predictions(basis, config.epsilons),
    )
    report.norms = {name: _fit(name, report.series(name)) for name in config.norms}
    if config.refinement_check and reference_outcome.result is not None:
        report.refinement_floor = refinement_floor(config, reference_outcome.result.trajectory)

    report.acceptance = {str(result.number): result for result in evaluate_sweep(report)}
    if out_dir is not None:
        export_rate_report(report, out_dir)
    return report
