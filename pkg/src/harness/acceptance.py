"""Acceptance criteria: self-checks, damping-suite checks and sweep checks.

Every evaluator returns ``CriterionResult`` objects; ``passed`` stays None when
the inputs a criterion needs are missing.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from src.acoustics.duhamel import direct_mode_integration, duhamel_solve
from src.acoustics.modes import ModeSampler
from src.acoustics.oscillation import oscillation_integral
from src.acoustics.rates import DampingReport
from src.config.settings import GridSettings, InitSettings, Settings, TimeSettings
from src.crystal.constitutive import penalty_energy, penalty_force
from src.fields.grid import Grid
from src.fields.norms import inner, norm
from src.fields.operators import laplacian
from src.fields.transforms import leray_project, random_band_limited_scalar, random_band_limited_vector
from src.solvers.runner import COMPRESSIBLE, run
from src.spectral.basis import ModeClass, build_basis, eigenpair
from src.spectral.domain import Domain

if TYPE_CHECKING:
    from src.harness.sweep import RateReport

logger = logging.getLogger(__name__)

ENERGY_DRIFT_LIMIT = 0.01
DENSITY_SLOPE_BAND = (0.8, 1.2)
DAMPING_RATIO_BAND = (0.7, 1.3)
DAMPING_SCALING_BAND = (1.6, 2.4)
J_MODE_SPREAD = 2.0
FLOOR_FACTOR = 3.0
CLOSED_FORM_OSCILLATION = 0.2 * abs(math.sin(5.0))


class CriterionResult(BaseModel):
    """Pass/fail of one acceptance criterion; ``passed`` is None when it could not be evaluated."""

    number: int
    name: str
    passed: Optional[bool] = None
    detail: str = ""
    measured: dict[str, Any] = Field(default_factory=dict)


def check_projection_algebra(nx: int = 128, samples: int = 20, seed: int = 0) -> CriterionResult:
    """Idempotency of P and orthogonality of P and Q on random band-limited fields."""
    grid = Grid(Domain.rectangle(math.pi, math.pi), nx)
    rng = np.random.default_rng(seed)
    worst_idempotency = 0.0
    worst_orthogonality = 0.0
    for _ in range(samples):
        v = random_band_limited_vector(grid, 8, rng)
        w = random_band_limited_vector(grid, 8, rng)
        pv, _ = leray_project(v)
        ppv, _ = leray_project(pv)
        _, qw = leray_project(w)
        worst_idempotency = max(worst_idempotency, norm(ppv - pv) / norm(v))
        worst_orthogonality = max(worst_orthogonality, abs(inner(pv, qw)) / (norm(v) * norm(w)))
    passed = worst_idempotency <= 1e-10 and worst_orthogonality <= 1e-9
    return CriterionResult(
        number=1,
        name="projection algebra",
        passed=passed,
        detail=f"idempotency {worst_idempotency:.2e}, orthogonality {worst_orthogonality:.2e}",
        measured={"idempotency": worst_idempotency, "orthogonality": worst_orthogonality},
    )


def eigen_residual(index: Sequence[int], nx: int) -> float:
    """Relative ‖ΔΦ + λ²Φ‖ of a sampled rectangle mode with the Neumann five-point Laplacian."""
    grid = Grid(Domain.rectangle(math.pi, math.pi), nx)
    mode = eigenpair(grid.domain, index)
    samples = mode.sample(grid)
    residual = laplacian(samples, grid, "neumann") + mode.lambda_squared * samples
    return norm(residual, grid=grid) / norm(samples, grid=grid)


def check_spectral(count: int = 32, index: Sequence[int] = (3, 2), sizes: Sequence[int] = (64, 128, 256)) -> CriterionResult:
    """Gram matrix of ``count`` modes on 128² and second-order eigen-residual decay."""
    grid = Grid(Domain.rectangle(math.pi, math.pi), 128)
    basis = build_basis(grid.domain, count)
    gram_error = float(np.max(np.abs(basis.gram_matrix(grid) - np.eye(len(basis)))))
    residuals = [eigen_residual(index, nx) for nx in sizes]
    orders = [math.log2(coarse / fine) for coarse, fine in zip(residuals, residuals[1:])]
    passed = gram_error <= 1e-10 and all(order >= 1.8 for order in orders)
    return CriterionResult(
        number=2,
        name="spectral correctness",
        passed=passed,
        detail=f"Gram deviation {gram_error:.2e}, residual orders {', '.join(f'{o:.2f}' for o in orders)}",
        measured={"gram_error": gram_error, "residuals": residuals, "orders": orders},
    )


def check_oscillation(epsilons: Sequence[float] = (0.1, 0.05, 0.025, 0.0125), samples: int = 2001) -> CriterionResult:
    """Closed-form oscillation integral and the O(ε) decay constant for smooth amplitudes."""
    ones = np.ones(samples)
    closed = abs(oscillation_integral(ones, ones, 1.0, 0.1, 1.0))
    closed_error = abs(closed - CLOSED_FORM_OSCILLATION)

    times = np.linspace(0.0, 1.0, samples)
    bk = np.cos(0.5 * math.pi * times)
    bl = 1.0 + 0.5 * times
    constants = [abs(oscillation_integral(bk, bl, 2.0, eps, 1.0, times=times)) / eps for eps in epsilons]
    spread = max(constants) / min(constants)
    passed = closed_error <= 1e-6 and spread <= 2.0
    return CriterionResult(
        number=5,
        name="oscillation cancellation",
        passed=passed,
        detail=f"closed form {closed:.6f} (error {closed_error:.1e}), constant spread {spread:.3f}",
        measured={"closed_form": closed, "constants": constants},
    )


def _beta_identity_error(grid: Grid, rng: np.random.Generator, count: int = 16) -> float:
    basis = build_basis(grid.domain, count)
    sampler = ModeSampler(basis, grid)
    phi = random_band_limited_scalar(grid, 6, rng).samples
    m = random_band_limited_vector(grid, 6, rng)
    _, qm = leray_project(m)
    amplitudes = sampler.amplitudes(phi, m.samples)
    worst = 0.0
    for item in sampler.sampled:
        if item.mode.is_constant:
            continue
        lhs = 2.0 * complex(np.sum(qm.samples * np.conj(item.vector_plus) * grid.weights))
        rhs = amplitudes[(item.mode.index, 1)] - amplitudes[(item.mode.index, -1)]
        worst = max(worst, abs(lhs - rhs))
    return worst / max(1.0, norm(m))


def _duhamel_error(rng: np.random.Generator) -> float:
    times = np.linspace(0.0, 1.0, 51)
    c = rng.standard_normal(times.size) + 1j * rng.standard_normal(times.size)
    lambda_eps = complex(-abs(rng.standard_normal()) * 0.3, 2.0)
    exact = duhamel_solve(1.0 + 0.5j, lambda_eps, c, 0.1, times)
    direct = direct_mode_integration(1.0 + 0.5j, lambda_eps, c, 0.1, times)
    return float(np.max(np.abs(exact - direct)) / max(1.0, float(np.max(np.abs(exact)))))


def _penalty_gradient_error(grid: Grid, rng: np.random.Generator, sigma0: float = 0.2, step: float = 1e-5) -> float:
    d = np.stack([0.8 * np.cos(grid.mesh[0]), 0.8 * np.sin(grid.mesh[0]), 0.3 + 0.1 * np.cos(grid.mesh[-1])])
    direction = rng.standard_normal(d.shape)

    def energy(value: np.ndarray) -> float:
        return float(np.sum(penalty_energy(value, sigma0) * grid.weights))

    numeric = (energy(d + step * direction) - energy(d - step * direction)) / (2.0 * step)
    analytic = float(np.sum(np.sum(penalty_force(d, sigma0) * direction, axis=0) * grid.weights))
    return abs(numeric - analytic) / max(abs(analytic), 1e-300)


def check_invariants(seed: int = 0) -> CriterionResult:
    """Mass, director bound, β-identity, Duhamel oracle and penalty-force gradient."""
    rng = np.random.default_rng(seed)
    settings = Settings(
        grid=GridSettings(nx=32, ny=32),
        time=TimeSettings(T=0.02, dt=2e-3, output_stride=5),
        init=InitSettings(profile="vortex", seed=seed),
    )
    result = run(settings, COMPRESSIBLE)
    diagnostics = result.diagnostics
    grid = Grid(Domain.rectangle(math.pi, math.pi), 64)
    measured = {
        "mass_drift": diagnostics.mass_drift,
        "director_excess": diagnostics.max_director - diagnostics.director_bound,
        "beta_identity": _beta_identity_error(grid, rng),
        "duhamel": _duhamel_error(rng),
        "penalty_gradient": _penalty_gradient_error(grid, rng),
    }
    limits = {
        "mass_drift": 1e-12,
        "director_excess": 1e-8,
        "beta_identity": 1e-10,
        "duhamel": 1e-8,
        "penalty_gradient": 1e-6,
    }
    failing = [name for name, value in measured.items() if value > limits[name]]
    return CriterionResult(
        number=9,
        name="invariant suite",
        passed=not failing,
        detail="all invariants hold" if not failing else f"failing: {', '.join(failing)}",
        measured=measured,
    )


def self_checks(seed: int = 0) -> list[CriterionResult]:
    """Criteria that need no stored artifacts."""
    return [check_projection_algebra(seed=seed), check_spectral(), check_oscillation(), check_invariants(seed)]


def _boundary_rate(entry) -> float:
    return entry.measured_rate - entry.bulk_rate


def evaluate_damping(report: Optional[DampingReport], mode_class: ModeClass) -> CriterionResult:
    """Criterion 3 for I-mode suites, criterion 4 for J-mode suites."""
    if mode_class == ModeClass.I:
        result = CriterionResult(number=3, name="damping constant")
    else:
        result = CriterionResult(number=4, name="undamped mode")
    if report is None:
        result.detail = "no damping report"
        return result
    entries = [entry for entry in report.entries if entry.mode_class == mode_class.value]
    if len(entries) < 2:
        result.detail = f"need at least two {mode_class.value}-mode entries, found {len(entries)}"
        return result

    if mode_class == ModeClass.I:
        ratios = [entry.ratio for entry in entries]
        scaling = []
        for entry in entries:
            partner = next((other for other in entries if math.isclose(other.epsilon, 4.0 * entry.epsilon)), None)
            if partner is not None and _boundary_rate(partner) > 0:
                scaling.append(_boundary_rate(entry) / _boundary_rate(partner))
        ratio_ok = all(r is not None and DAMPING_RATIO_BAND[0] <= r <= DAMPING_RATIO_BAND[1] for r in ratios)
        scaling_ok = bool(scaling) and all(DAMPING_SCALING_BAND[0] <= s <= DAMPING_SCALING_BAND[1] for s in scaling)
        result.passed = ratio_ok and scaling_ok
        result.measured = {"ratios": ratios, "scaling": scaling}
        result.detail = f"ratios {ratios}, rate(eps)/rate(4 eps) {scaling}"
        return result

    rates = [entry.measured_rate for entry in entries]
    if min(rates) <= 0:
        result.passed = False
        result.detail = f"nonpositive measured rate in {rates}"
        return result
    spread = max(rates) / min(rates)
    result.passed = spread < J_MODE_SPREAD
    result.measured = {"rates": rates, "spread": spread}
    result.detail = f"measured rates {rates}, spread {spread:.3f}"
    return result


def _energy_check(report: "RateReport") -> CriterionResult:
    result = CriterionResult(number=6, name="energy inequality")
    runs = [report.reference] + report.members
    drifts = {f"{member.epsilon:.6g}": member.diagnostics.get("energy_drift") for member in runs if member.diagnostics}
    if not drifts:
        result.detail = "no completed runs"
        return result
    worst = max(value for value in drifts.values() if value is not None)
    failed = [member.epsilon for member in runs if member.status != "completed"]
    result.passed = worst <= ENERGY_DRIFT_LIMIT and not failed
    result.measured = {"energy_drift": drifts}
    result.detail = f"worst relative drift {worst:.2e}" + (f"; failed runs at {failed}" if failed else "")
    return result


def _density_rate_check(report: "RateReport") -> CriterionResult:
    result = CriterionResult(number=7, name="density rate")
    if report.kappa != 2.0:
        result.detail = f"needs an L2 density norm (kappa = 2); kappa = {report.kappa}"
        return result
    fit = report.norms.get("rho_Lkappa")
    if fit is None or fit.slope is None:
        result.detail = "density rate not fitted" if fit is None else f"slope undefined: {fit.reason}"
        return result
    low, high = DENSITY_SLOPE_BAND
    result.passed = low <= fit.slope <= high
    result.measured = {"slope": fit.slope, "correlation": fit.correlation}
    result.detail = f"slope {fit.slope:.3f} (band [{low}, {high}])"
    return result


def _convergence_check(report: "RateReport") -> CriterionResult:
    result = CriterionResult(number=8, name="limit convergence")
    monotone: dict[str, bool] = {}
    for name in ("u_L2L2", "d_L2H1", "Q1u_L2L2"):
        values = [value for _, value in report.series(name)]
        if len(values) >= 2:
            monotone[name] = all(later <= earlier for earlier, later in zip(values, values[1:]))
    if not monotone:
        result.detail = "fewer than two completed runs"
        return result
    result.measured = {"monotone": monotone, "refinement_floor": report.refinement_floor}
    if not all(monotone.values()):
        result.passed = False
        result.detail = f"not monotone: {[name for name, ok in monotone.items() if not ok]}"
        return result
    final = report.series("d_L2H1")[-1][1] if report.series("d_L2H1") else None
    if report.refinement_floor is None or final is None:
        result.detail = "monotone; refinement floor unavailable"
        return result
    result.measured["final_d"] = final
    result.passed = final < FLOOR_FACTOR * report.refinement_floor
    result.detail = f"monotone; final d difference {final:.3e} vs floor {report.refinement_floor:.3e}"
    return result


def evaluate_sweep(report: "RateReport") -> list[CriterionResult]:
    """Criteria 6, 7 and 8 from a sweep report."""
    return [_energy_check(report), _density_rate_check(report), _convergence_check(report)]


def check_determinism(first: Path, second: Path) -> CriterionResult:
    """Criterion 10: report files of two sweep directories are byte-identical."""
    result = CriterionResult(number=10, name="determinism")
    first, second = Path(first), Path(second)
    names = sorted(path.name for path in first.glob("*") if path.is_file() and path.suffix in {".json", ".csv"})
    if not names:
        result.detail = f"no report files in {first}"
        return result
    differing = [
        name for name in names if not (second / name).exists() or (first / name).read_bytes() != (second / name).read_bytes()
    ]
    result.passed = not differing
    result.measured = {"files": names, "differing": differing}
    result.detail = "identical" if not differing else f"differing files: {differing}"
    return result


def summarize(results: Sequence[CriterionResult]) -> tuple[int, int, int]:
    """(passed, failed, not evaluated) counts."""
    passed = sum(1 for result in results if result.passed is True)
    failed = sum(1 for result in results if result.passed is False)
    return passed, failed, len(results) - passed - failed