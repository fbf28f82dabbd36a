"""Tests for wave runs, mode amplitudes, the Duhamel integrator, damping fits and oscillation integrals."""

import math
from typing import Optional

import numpy as np
import pytest

from src.acoustics.duhamel import direct_mode_integration, duhamel_solve, phi1, phi2
from src.acoustics.modes import (
    FORCING_COMPONENTS,
    MODE_COLUMNS,
    ModeSampler,
    TraceRecorder,
    acoustic_forcing,
    forcing_components,
    q_split,
)
from src.acoustics.oscillation import gradient_pair_residual, oscillation_integral
from src.acoustics.rates import (
    DampingEntry,
    DampingReport,
    default_run_length,
    fit_damping_rate,
    measure_damping,
)
from src.acoustics.wave import WaveState, linearized_wave_run, wave_time_step
from src.crystal.constitutive import ericksen_stress
from src.crystal.params import ModelParams
from src.errors import UnstableModeError
from src.fields.grid import Grid
from src.fields.models import DirectorField, ScalarField, VectorField
from src.fields.operators import diff_op
from src.solvers.compressible import CompressibleState
from src.spectral.basis import SpectralBasis, build_basis, eigenpair
from src.spectral.domain import Domain


def mode_state(grid: Grid, index: tuple[int, ...]) -> tuple[ScalarField, VectorField]:
    return ScalarField(grid, eigenpair(grid.domain, index).sample(grid)), VectorField.zeros(grid)


def uniform_state(
    grid: Grid, u: np.ndarray, params: Optional[ModelParams] = None, director: Optional[np.ndarray] = None
) -> CompressibleState:
    """ρ ≡ 1 with the given velocity; the director defaults to (0, 0, 1)."""
    if director is None:
        director = np.zeros((3,) + grid.shape)
        director[2] = 1.0
    d = DirectorField(grid, director)
    return CompressibleState(
        t=0.0,
        rho=ScalarField(grid, np.ones(grid.shape)),
        u=VectorField(grid, u),
        d=d,
        params=params or ModelParams(),
        boundary=d,
    )


class TestLinearizedWaveRun:
    """Tests for the Crank-Nicolson wave integrator."""

    def test_time_step(self):
        """dt resolves one period 2πε/λ with the requested number of steps."""
        assert wave_time_step(0.1, 2.0, 10) == pytest.approx(2.0 * math.pi * 0.1 / 20.0)

    def test_inviscid_energy_is_conserved(self, square_grid: Grid):
        """Without viscosity the discrete wave energy is invariant."""
        phi0, m0 = mode_state(square_grid, (1, 1))
        run = linearized_wave_run(phi0, m0, 0.1, 0.0, 0.5)
        assert run.energy[0] == pytest.approx(0.5, rel=1e-10)
        assert np.max(np.abs(run.energy - run.energy[0])) < 1e-8

    def test_viscous_energy_decreases(self, square_grid: Grid):
        """Viscosity only removes energy."""
        phi0, m0 = mode_state(square_grid, (1, 0))
        run = linearized_wave_run(phi0, m0, 0.1, 1.0, 0.5)
        assert np.all(np.diff(run.energy) <= 1e-12)
        assert run.energy[-1] < run.energy[0]

    def test_momentum_stays_zero_on_walls(self, square_grid: Grid):
        """The no-slip condition holds at every step."""
        phi0, m0 = mode_state(square_grid, (2, 1))
        run = linearized_wave_run(phi0, m0, 0.1, 1.0, 0.2)
        assert np.all(run.final.m.samples[:, square_grid.boundary_mask] == 0.0)

    def test_traces_start_at_projection(self, square_grid: Grid, square_basis: SpectralBasis):
        """A pure mode starts with β^± = 1 and tracked traces are aligned with the run."""
        phi0, m0 = mode_state(square_grid, (1, 0))
        run = linearized_wave_run(phi0, m0, 0.1, 1.0, 0.3, basis=square_basis, track=[(1, 0)])
        trace = run.trace((1, 0), 1)
        assert trace.beta[0] == pytest.approx(1.0, abs=1e-10)
        assert run.trace((1, 0), -1).beta[0] == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(trace.times, run.times)
        assert set(run.traces) == {((1, 0), 1), ((1, 0), -1)}

    def test_steps_fit_final_time(self, square_grid: Grid):
        """The step is shortened so that the run ends exactly at T."""
        phi0, m0 = mode_state(square_grid, (1, 0))
        run = linearized_wave_run(phi0, m0, 0.1, 1.0, 0.25, steps_per_period=16)
        assert run.times[-1] == pytest.approx(0.25)
        assert run.dt <= wave_time_step(0.1, 1.0, 16)

    def test_untracked_mode(self, square_grid: Grid, square_basis: SpectralBasis):
        """Tracking a mode outside the basis is an error."""
        phi0, m0 = mode_state(square_grid, (1, 0))
        with pytest.raises(ValueError):
            linearized_wave_run(phi0, m0, 0.1, 1.0, 0.1, basis=square_basis, track=[(9, 9)])

    def test_rejects_nonpositive_epsilon(self, square_grid: Grid):
        """ε must be positive."""
        phi0, m0 = mode_state(square_grid, (1, 0))
        with pytest.raises(ValueError):
            linearized_wave_run(phi0, m0, 0.0, 1.0, 0.1)


class TestModeAmplitudes:
    """Tests for sampled eigenvectors and amplitude traces."""

    def test_domain_mismatch(self, square_basis: SpectralBasis):
        """Basis and grid must share a domain."""
        with pytest.raises(ValueError):
            ModeSampler(square_basis, Grid(Domain.rectangle(2.0, 2.0), 32))

    def test_unresolved_modes(self):
        """Mode indices must stay below the cell count."""
        with pytest.raises(ValueError):
            ModeSampler(build_basis(Domain.slab(), 10), Grid(Domain.slab(), 8))

    def test_pure_mode_amplitudes(self, square_grid: Grid, square_basis: SpectralBasis):
        """(Φ_k, 0) has β_k^± = 1 and nothing in the other modes."""
        sampler = ModeSampler(square_basis, square_grid)
        phi = eigenpair(square_grid.domain, (2, 1)).sample(square_grid)
        amplitudes = sampler.amplitudes(phi, np.zeros((2,) + square_grid.shape))
        for (index, _), value in amplitudes.items():
            expected = 1.0 if index == (2, 1) else 0.0
            assert value == pytest.approx(expected, abs=1e-10)

    def test_recorder_rows(self, square_grid: Grid):
        """One row per mode and sign, in MODE_COLUMNS order."""
        basis = build_basis(square_grid.domain, 3)
        recorder = TraceRecorder(ModeSampler(basis, square_grid))
        phi, m = mode_state(square_grid, (1, 0))
        recorder.record(0.0, WaveState(phi, m, 0.1))
        rows = recorder.rows()
        assert len(rows) == 2 * len(basis)
        assert list(rows[0]) == MODE_COLUMNS
        assert {row["sign"] for row in rows} == {"+", "-"}

    def test_q_split_on_rectangle(self, square_grid: Grid, square_basis: SpectralBasis):
        """A mode gradient on the rectangle is all Q₁."""
        u = VectorField(square_grid, eigenpair(square_grid.domain, (1, 0)).sample_gradient(square_grid))
        split = q_split(u, square_basis)
        assert split.q1_norm == pytest.approx(1.0, rel=1e-8)
        assert np.max(np.abs(split.q2.samples)) == 0.0
        assert split.tail_norm < 1e-8
        assert split.tail_norm <= split.tail_bound

    def test_q_split_on_slab(self):
        """Slab gradients land in Q₂."""
        grid = Grid(Domain.slab(), 32)
        basis = build_basis(grid.domain, 4)
        u = VectorField(grid, eigenpair(grid.domain, (1,)).sample_gradient(grid))
        split = q_split(u, basis)
        assert split.q1_norm == 0.0
        assert np.max(np.abs(split.q2.samples)) > 0.1


class TestAcousticForcing:
    """Tests for the projected nonlinear forcing."""

    def test_equilibrium_has_no_forcing(self, square_grid: Grid, square_basis: SpectralBasis):
        """ρ ≡ 1, u ≡ 0 and a constant director give c_k = 0."""
        state = uniform_state(square_grid, np.zeros((2,) + square_grid.shape))
        forcing = acoustic_forcing(state, square_basis)
        assert len(forcing) == 2 * len(square_basis)
        assert all(abs(value) < 1e-12 for value in forcing.values())

    def test_convection_matches_quadrature(self, square_grid: Grid, square_basis: SpectralBasis):
        """m = ∇Φ₁₀ gives c_k = −(div(m⊗m), m_k) with div(m⊗m) = (−2Φ∂ₓΦ, 0)."""
        mode = eigenpair(square_grid.domain, (1, 0))
        phi = mode.sample(square_grid)
        m = mode.sample_gradient(square_grid)
        state = uniform_state(square_grid, m)
        sampler = ModeSampler(square_basis, square_grid)

        exact = np.stack([2.0 * phi * m[0], np.zeros_like(phi)])
        expected = sampler.vector_projections(exact)
        forcing = acoustic_forcing(state, square_basis, sampler=sampler)

        scale = max(abs(value) for value in expected.values())
        assert abs(expected[((2, 0), 1)]) == pytest.approx(scale)
        for key, value in expected.items():
            assert abs(forcing[key] - value) < 2e-2 * scale

    def test_components_sum_to_total(self, square_grid: Grid, square_basis: SpectralBasis):
        """The per-part projections add up to the total forcing."""
        mode = eigenpair(square_grid.domain, (1, 1))
        state = uniform_state(square_grid, 0.1 * mode.sample_gradient(square_grid))
        total = acoustic_forcing(state, square_basis)
        parts = acoustic_forcing(state, square_basis, components=True)
        assert set(parts) == set(FORCING_COMPONENTS)
        for key, value in total.items():
            assert sum(part[key] for part in parts.values()) == pytest.approx(value, abs=1e-12)

    def test_elastic_part_is_stress_divergence(self):
        """The elastic forcing is −div of the Ericksen stress away from the walls."""
        grid = Grid(Domain.rectangle(), 64)
        x, y = grid.mesh
        director = np.stack([0.3 * np.cos(x) * np.cos(y), 0.2 * np.sin(2 * y), 0.9 + 0.1 * np.cos(x)])
        params = ModelParams(lambda_=1.5, sigma0=0.5)
        state = uniform_state(grid, np.zeros((2,) + grid.shape), params, director)

        parts = forcing_components(state)
        from_stress = -diff_op("div", ericksen_stress(state.d, 1.5, 0.5)).samples
        interior = (slice(None), slice(3, -3), slice(3, -3))
        scale = float(np.max(np.abs(from_stress[interior])))
        assert float(np.max(np.abs(parts["elastic"][interior] - from_stress[interior]))) < 0.05 * scale
        for name in ("convection", "pressure", "viscous"):
            assert np.max(np.abs(parts[name])) < 1e-12


class TestDuhamel:
    """Tests for the exact-exponential amplitude integrator."""

    def test_phi_functions_near_zero(self):
        """The series branches join the closed forms continuously."""
        assert complex(phi1(np.array(0.0))) == pytest.approx(1.0)
        assert complex(phi2(np.array(0.0))) == pytest.approx(0.5)
        x = np.array(2e-4)
        assert complex(phi1(np.array(9.9e-5))) == pytest.approx(np.expm1(9.9e-5) / 9.9e-5, rel=1e-12)
        assert complex(phi2(x)) == pytest.approx((np.expm1(x) - x) / x**2, rel=1e-6)

    def test_free_oscillation(self):
        """Without forcing b(t) = b₀·exp(conj(a)·t/ε)."""
        times = np.linspace(0.0, 1.0, 51)
        result = duhamel_solve(1.0 + 0.5j, 2j, 0.0, 0.1, times)
        assert np.allclose(result, (1.0 + 0.5j) * np.exp(-2j * times / 0.1), atol=1e-12)

    def test_constant_forcing_is_exact(self):
        """Constant forcing is integrated without discretization error."""
        times = np.linspace(0.0, 2.0, 11)
        lam, eps, c = -0.3 + 4j, 0.05, 0.7 - 0.2j
        rate = np.conj(lam) / eps
        expected = 2.0 * np.exp(rate * times) + c * np.expm1(rate * times) / rate
        assert np.allclose(duhamel_solve(2.0, lam, c, eps, times), expected, atol=1e-12)

    def test_matches_direct_integration(self):
        """Piecewise-linear forcing agrees with a DOP853 reference."""
        times = np.linspace(0.0, 0.5, 21)
        forcing = np.sin(3.0 * times) + 1j * times**2
        exact = duhamel_solve(1.0, -0.5 + 3j, forcing, 0.1, times)
        reference = direct_mode_integration(1.0, -0.5 + 3j, forcing, 0.1, times)
        assert np.max(np.abs(exact - reference)) < 1e-9

    def test_validation(self):
        """Growing exponents and malformed time grids are rejected."""
        times = np.linspace(0.0, 1.0, 5)
        with pytest.raises(UnstableModeError):
            duhamel_solve(1.0, 0.1 + 1j, 0.0, 0.1, times)
        with pytest.raises(ValueError):
            duhamel_solve(1.0, 1j, 0.0, 0.1, times[::-1])
        with pytest.raises(ValueError):
            duhamel_solve(1.0, 1j, np.zeros(3), 0.1, times)
        with pytest.raises(ValueError):
            duhamel_solve(1.0, 1j, 0.0, 0.0, times)


class TestDampingRates:
    """Tests for envelope fits and damping measurements."""

    def test_fit_uses_envelope_peaks(self):
        """Peaks of an oscillating decay give its envelope rate."""
        t = np.linspace(0.0, 5.0, 2001)
        magnitudes = np.exp(-0.3 * t) * (1.5 + np.cos(20.0 * t))
        fit = fit_damping_rate(t, magnitudes)
        assert fit.used_peaks
        assert fit.rate == pytest.approx(0.3, rel=1e-2)

    def test_fit_monotone_series(self):
        """Monotone decay uses every sample."""
        t = np.linspace(0.0, 1.0, 20)
        fit = fit_damping_rate(t, np.exp(-2.0 * t))
        assert not fit.used_peaks
        assert fit.points == 20
        assert fit.rate == pytest.approx(2.0)

    def test_fit_validation(self):
        """Short series and nonpositive magnitudes are rejected."""
        with pytest.raises(ValueError):
            fit_damping_rate(np.arange(5.0), np.ones(5))
        with pytest.raises(ValueError):
            fit_damping_rate(np.arange(12.0), np.zeros(12))

    def test_default_run_length(self):
        """Runs last at least four periods."""
        assert default_run_length(0.1, 1.0, 0.0, 0.0) == pytest.approx(0.8 * math.pi)
        assert default_run_length(0.1, 1.0, 0.1, 0.0) == pytest.approx(15.0)

    def test_report_reload(self):
        """Stored reports reload into equal entries, ordered by decreasing ε per mode."""
        entries = [
            DampingEntry((1, 0), 0.05, 1.0, "I", 1.0, 0.5, 1.6, 1.1),
            DampingEntry((1, 0), 0.1, 1.0, "I", 0.7, 0.5, 1.2, None),
        ]
        report = DampingReport(mu=1.0, entries=entries)
        data = report.to_dict()
        assert data["modes"][0]["class"] == "I"
        restored = DampingReport.from_dict(data)
        assert restored == report
        assert [entry.epsilon for entry in restored.for_mode([1, 0])] == [0.1, 0.05]

    def test_constant_mode_is_rejected(self, square_grid: Grid, square_basis: SpectralBasis):
        """The constant mode does not oscillate."""
        with pytest.raises(ValueError):
            measure_damping(square_grid, square_basis, (0, 0), 0.1)

    def test_slab_decays_at_bulk_rate(self):
        """Slab modes only feel the interior viscous rate μλ²/2."""
        grid = Grid(Domain.slab(), 64)
        basis = build_basis(grid.domain, 4)
        entry = measure_damping(grid, basis, (1,), 0.1)
        assert entry.mode_class == "J"
        assert entry.ratio is None
        assert entry.predicted_rate == 0.0
        assert entry.measured_rate == pytest.approx(entry.bulk_rate, rel=0.1)

    def test_rectangle_mode_has_prediction(self, square_grid: Grid, square_basis: SpectralBasis):
        """Rectangle modes are class I and get a measured-to-predicted ratio."""
        entry = measure_damping(square_grid, square_basis, (1, 0), 0.1)
        assert entry.mode_class == "I"
        assert entry.predicted_rate > 0
        assert entry.bulk_rate == pytest.approx(0.5)
        assert entry.measured_rate > 0
        assert entry.ratio is not None


class TestOscillation:
    """Tests for Filon integrals and the equal-eigenvalue identity."""

    def test_constant_product(self):
        """∫₀ᵀ e^{iωt} dt is reproduced exactly."""
        omega = 2.0 / 0.1
        expected = (np.exp(1j * omega) - 1.0) / (1j * omega)
        value = oscillation_integral(np.ones(11), np.ones(11), 2.0, 0.1, 1.0)
        assert value == pytest.approx(expected, abs=1e-12)

    def test_linear_product(self):
        """Linear products are integrated exactly on coarse grids."""
        omega = 2.0 / 0.05
        times = np.linspace(0.0, 1.0, 4)
        expected = np.exp(1j * omega) * (1.0 / (1j * omega) + 1.0 / omega**2) - 1.0 / omega**2
        value = oscillation_integral(times, np.ones(4), 2.0, 0.05, 1.0, times=times)
        assert value == pytest.approx(expected, abs=1e-12)

    def test_shrinks_with_epsilon(self):
        """Cross terms of smooth amplitudes are O(ε)."""
        t = np.linspace(0.0, 1.0, 201)
        b = np.exp(-t)
        values = [abs(oscillation_integral(b, b, 2.0, eps, 1.0)) for eps in (0.1, 0.05, 0.025)]
        assert values[0] > values[1] > values[2]
        assert values[2] < 0.05

    def test_equal_eigenvalues_rejected(self):
        """Δλ = 0 is handled by the gradient identity instead."""
        with pytest.raises(ValueError):
            oscillation_integral(np.ones(3), np.ones(3), 0.0, 0.1, 1.0)

    def test_gradient_pair_residual_converges(self):
        """The equal-eigenvalue identity holds to second order."""
        domain = Domain.rectangle()
        first, second = eigenpair(domain, (1, 0)), eigenpair(domain, (0, 1))
        coarse = gradient_pair_residual(first, second, Grid(domain, 32))
        fine = gradient_pair_residual(first, second, Grid(domain, 64))
        assert fine < coarse < 0.05
        assert coarse / fine > 3.0

    def test_gradient_pair_requires_equal_eigenvalues(self, square_grid: Grid):
        """Distinct eigenvalues are rejected."""
        domain = square_grid.domain
        with pytest.raises(ValueError):
            gradient_pair_residual(eigenpair(domain, (1, 0)), eigenpair(domain, (1, 1)), square_grid)
