"""Tests for the Neumann eigenbasis, damping corrections and the boundary trace condition."""

import math

import numpy as np
import pytest

from src.fields.grid import Grid
from src.spectral.basis import (
    ModeClass,
    WaveEigenvector,
    approximate_eigenvalue,
    build_basis,
    damping_correction,
    eigenpair,
)
from src.spectral.condition import check_condition_H
from src.spectral.domain import Domain, DomainKind


class TestDomain:
    """Tests for Domain."""

    def test_rectangle_defaults(self):
        """The default rectangle is the square of side π."""
        domain = Domain.rectangle()
        assert domain.kind == DomainKind.RECTANGLE
        assert domain.dim == 2
        assert domain.extents == (math.pi, math.pi)
        assert domain.measure == pytest.approx(math.pi**2)

    def test_slab_ignores_ly(self):
        """A slab is one-dimensional and measures its length."""
        domain = Domain.slab(2.0)
        assert domain.is_slab
        assert domain.dim == 1
        assert domain.extents == (2.0,)
        assert domain.measure == pytest.approx(2.0)

    def test_rejects_nonpositive_length(self):
        """Lengths must be positive."""
        with pytest.raises(ValueError):
            Domain.rectangle(0.0, 1.0)


class TestNeumannMode:
    """Tests for closed-form eigenpairs."""

    def test_eigenvalue_on_square(self):
        """λ² = m² + n² on the square of side π."""
        mode = eigenpair(Domain.rectangle(), (3, 2))
        assert mode.lambda_squared == pytest.approx(13.0)
        assert mode.lambda0 == pytest.approx(math.sqrt(13.0))

    def test_index_validation(self):
        """Indices must match the dimension and be nonnegative."""
        with pytest.raises(ValueError):
            eigenpair(Domain.rectangle(), (1,))
        with pytest.raises(ValueError):
            eigenpair(Domain.slab(), (-1,))

    def test_unit_norm_on_fine_grid(self):
        """Sampled modes have unit discrete L² norm."""
        grid = Grid(Domain.rectangle(), 64)
        for index in [(0, 0), (1, 0), (2, 3)]:
            samples = eigenpair(grid.domain, index).sample(grid)
            assert float(np.sum(grid.weights * samples**2)) == pytest.approx(1.0, abs=1e-10)

    def test_gradient_vanishes_normal_to_boundary(self):
        """∂Φ/∂x is zero on the edges x = 0 and x = Lx."""
        mode = eigenpair(Domain.rectangle(), (2, 1))
        y = np.linspace(0.0, math.pi, 17)
        for x in (0.0, math.pi):
            gradient = mode.gradient_at(np.full_like(y, x), y)
            assert np.max(np.abs(gradient[0])) < 1e-12

    def test_boundary_integral_closed_form(self):
        """∫|∇Φ|² ds equals 2/π for the (1,0) mode of the unit-π square."""
        mode = eigenpair(Domain.rectangle(), (1, 0))
        assert mode.boundary_integral() == pytest.approx(2.0 / math.pi)

    def test_boundary_integral_zero_on_slab(self):
        """Slab modes have no tangential boundary derivative."""
        assert eigenpair(Domain.slab(), (3,)).boundary_integral() == 0.0

    def test_label(self):
        """Labels list the index in parentheses."""
        assert eigenpair(Domain.rectangle(), (3, 2)).label() == "(3,2)"


class TestWaveEigenvector:
    """Tests for wave eigenvectors."""

    def test_eigenvalue_sign(self):
        """Eigenvalues are ±iλ."""
        mode = eigenpair(Domain.rectangle(), (1, 1))
        assert WaveEigenvector(mode, 1).eigenvalue == pytest.approx(1j * math.sqrt(2.0))
        assert WaveEigenvector(mode, -1).eigenvalue == pytest.approx(-1j * math.sqrt(2.0))

    def test_invalid_sign(self):
        """Only ±1 are accepted."""
        with pytest.raises(ValueError):
            WaveEigenvector(eigenpair(Domain.rectangle(), (1, 1)), 2)

    def test_constant_mode_has_zero_vector_part(self):
        """The constant mode carries no velocity."""
        grid = Grid(Domain.rectangle(), 8)
        vector = WaveEigenvector(eigenpair(grid.domain, (0, 0))).vector_part(grid)
        assert np.all(vector == 0)


class TestDampingCorrection:
    """Tests for the first-order eigenvalue correction."""

    def test_rectangle_modes_are_damped(self):
        """Rectangle modes have a negative real correction and equal real parts for both signs."""
        mode = eigenpair(Domain.rectangle(), (1, 0))
        correction = damping_correction(mode, 1.0)
        assert correction.mode_class == ModeClass.I
        assert correction.real_part < 0
        assert correction.value_plus.real == pytest.approx(correction.value_minus.real)
        assert correction.value_plus.imag == pytest.approx(-correction.value_minus.imag)

    def test_closed_form_value(self):
        """Re iλ₁ = −½·√(μ/(2λ³))·∫|∇Φ|² ds."""
        mode = eigenpair(Domain.rectangle(), (1, 0))
        expected = -0.5 * math.sqrt(2.0 / 2.0) * (2.0 / math.pi)
        assert damping_correction(mode, 2.0).real_part == pytest.approx(expected)

    def test_slab_modes_are_undamped(self):
        """Slab modes belong to class J."""
        correction = damping_correction(eigenpair(Domain.slab(), (2,)), 1.0)
        assert correction.mode_class == ModeClass.J
        assert correction.value == 0j

    def test_constant_mode_is_trivial(self):
        """The constant mode has no correction."""
        correction = damping_correction(eigenpair(Domain.rectangle(), (0, 0)), 1.0)
        assert correction.mode_class == ModeClass.TRIVIAL

    def test_negative_viscosity_rejected(self):
        """Viscosity must be nonnegative."""
        with pytest.raises(ValueError):
            damping_correction(eigenpair(Domain.rectangle(), (1, 0)), -1.0)

    def test_approximate_eigenvalue_includes_bulk(self):
        """The bulk term −εμλ²/2 is added on request."""
        mode = eigenpair(Domain.rectangle(), (1, 0))
        correction = damping_correction(mode, 1.0)
        with_bulk = approximate_eigenvalue(mode, correction, 1, 0.01, 1.0)
        without = approximate_eigenvalue(mode, correction, 1, 0.01, 1.0, include_bulk=False)
        assert (without - with_bulk).real == pytest.approx(0.005)


class TestBuildBasis:
    """Tests for basis construction."""

    def test_ordering_and_truncation(self):
        """The constant mode comes first, then modes by increasing λ² with n as tie-breaker."""
        basis = build_basis(Domain.rectangle(), 5)
        assert len(basis) == 6
        assert [mode.index for mode in basis.modes] == [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]
        assert basis.next_lambda_squared == pytest.approx(5.0)

    def test_slab_basis(self):
        """Slab bases list (m,) for m = 0..N."""
        basis = build_basis(Domain.slab(), 4)
        assert [mode.index for mode in basis.modes] == [(0,), (1,), (2,), (3,), (4,)]
        assert basis.in_class(ModeClass.I) == []

    def test_rejects_empty_truncation(self):
        """At least one nonconstant mode is required."""
        with pytest.raises(ValueError):
            build_basis(Domain.rectangle(), 0)

    def test_find(self):
        """find returns the mode and its correction or raises KeyError."""
        basis = build_basis(Domain.rectangle(), 8)
        mode, correction = basis.find((1, 1))
        assert mode.index == (1, 1)
        assert correction.mode_class == ModeClass.I
        with pytest.raises(KeyError):
            basis.find((9, 9))

    def test_gram_matrix_is_identity(self):
        """Sampled modes are orthonormal under the trapezoid rule."""
        basis = build_basis(Domain.rectangle(), 12)
        gram = basis.gram_matrix(Grid(Domain.rectangle(), 64))
        assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10

    def test_rows(self):
        """Rows carry the basis CSV columns."""
        rows = build_basis(Domain.rectangle(), 2).to_rows()
        assert rows[0]["class"] == "trivial"
        assert rows[1]["m"] == 1 and rows[1]["n"] == 0
        assert rows[1]["re_lambda1"] < 0


class TestConditionH:
    """Tests for check_condition_H."""

    def test_rectangle_satisfies_condition(self):
        """No rectangle mode has a constant boundary trace."""
        report = check_condition_H(build_basis(Domain.rectangle(), 16))
        assert report.satisfied
        assert report.violating == []

    def test_even_slab_modes_violate_condition(self):
        """Even slab modes take the same value at both ends."""
        report = check_condition_H(build_basis(Domain.slab(), 4))
        assert not report.satisfied
        assert report.violating == [(2,), (4,)]

    def test_degenerate_pairs_on_square(self):
        """(1,0) and (0,1) share λ² = 1 on the square."""
        report = check_condition_H(build_basis(Domain.rectangle(), 4))
        pairs = [(pair.first, pair.second) for pair in report.degenerate_pairs]
        assert ((1, 0), (0, 1)) in pairs

    def test_to_dict(self):
        """The report serializes with string keys."""
        data = check_condition_H(build_basis(Domain.rectangle(), 2)).to_dict()
        assert data["satisfied"] is True
        assert "1,0" in data["trace_spread"]
