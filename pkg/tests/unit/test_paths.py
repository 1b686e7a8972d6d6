"""
Unit tests for Coulomb-approximation line integrals.
"""

import math

import numpy as np
import pytest

from borninfeld.exceptions import AccuracyError, InvalidInputError, SingularityError
from borninfeld.fields.bi_fields import DipoleConfig, Vec3, born_pair_potential, coulomb_potential
from borninfeld.fields.paths import (
    Path,
    axial_path_a,
    axial_path_b,
    circulation,
    line_integral_potential,
    meridian_loop,
    path_potentials,
    proton_side_loop,
    random_loop,
    remainder_integral,
)
from borninfeld.fields.quadrature import integrate_breakpoints, integrate_piece
from borninfeld.metrics.solver_metrics import get_solver_metrics


class TestPath:
    """Tests for path construction."""

    def test_needs_two_waypoints(self):
        """Test that a single waypoint is rejected."""
        with pytest.raises(InvalidInputError):
            Path((Vec3(0.0, 0.0, 0.0),))

    def test_closed_path_must_return(self):
        """Test that closed paths end where they start."""
        with pytest.raises(InvalidInputError):
            Path((Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0)), closed=True)

    def test_accepts_array_waypoints(self):
        """Test coercion of array-like waypoints."""
        path = Path(([0, 0, 1], np.array([1.0, 2.0, 3.0])))

        assert path.start == Vec3(0.0, 0.0, 1.0)
        assert path.end == Vec3(1.0, 2.0, 3.0)

    def test_mirrored(self):
        """Test z -> -z reflection."""
        path = Path((Vec3(1.0, 0.0, 2.0), Vec3(0.0, 3.0, -1.0))).mirrored()

        assert path.waypoints == (Vec3(1.0, 0.0, -2.0), Vec3(0.0, 3.0, 1.0))

    def test_segments_skip_repeats(self):
        """Test that zero-length segments are dropped."""
        a, b = Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0)
        path = Path((a, a, b))

        assert list(path.segments()) == [(a, b)]

    def test_axial_paths(self):
        """Test the endpoints of the two axial paths."""
        cfg = DipoleConfig(separation=2.0, beta=0.3)
        path_a = axial_path_a(cfg, far=100.0)
        path_b = axial_path_b(cfg, far=100.0)

        assert path_a.waypoints == (Vec3(0.0, 0.0, -101.0), cfg.electron)
        assert path_b.waypoints == (Vec3(0.0, 0.0, 101.0), cfg.proton, cfg.electron)

    def test_meridian_loop(self):
        """Test the proton-side rectangle."""
        loop = proton_side_loop(DipoleConfig(separation=2.0, beta=0.1))

        assert loop.closed
        assert loop.start == Vec3(0.5, 0.0, 0.0)
        assert Vec3(2.0, 0.0, 2.0) in loop.waypoints

    def test_meridian_loop_needs_increasing_ranges(self):
        """Test range validation."""
        with pytest.raises(InvalidInputError):
            meridian_loop((1.0, 0.5), (0.0, 1.0))


class TestQuadrature:
    """Tests for the quadrature wrappers."""

    def test_integrate_piece(self):
        """Test a smooth integral."""
        value, error = integrate_piece(math.cos, 0.0, math.pi / 2, tol=1e-12)

        assert value == pytest.approx(1.0, abs=1e-12)
        assert error <= 1e-12

    def test_integrate_breakpoints(self):
        """Test summation over breakpoints."""
        value, _ = integrate_breakpoints(lambda t: t, [0.0, 1.0, 2.0], tol=1e-12)

        assert value == pytest.approx(2.0, abs=1e-12)

    def test_single_breakpoint_is_empty(self):
        """Test that one abscissa integrates to zero."""
        assert integrate_breakpoints(math.exp, [1.0], tol=1e-12) == (0.0, 0.0)

    def test_budget_exhaustion_raises(self):
        """Test that QUADPACK failures become AccuracyError."""
        with pytest.raises(AccuracyError) as excinfo:
            integrate_piece(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, tol=1e-14, limit=1)

        assert excinfo.value.error_estimate > 0


class TestLineIntegrals:
    """Tests for path potentials and circulations."""

    @pytest.fixture
    def cfg(self):
        """Dipole with r = 2 and beta = 0.3."""
        return DipoleConfig(separation=2.0, beta=0.3)

    def test_beta_zero_reproduces_coulomb(self):
        """Test that beta = 0 gives the Coulomb pair potential exactly."""
        cfg = DipoleConfig(separation=2.0, beta=0.0)
        end = Vec3(0.7, 0.2, -0.4)
        path = Path((Vec3(5.0, 0.0, 5.0), Vec3(1.0, 1.0, 0.0), end))

        assert line_integral_potential(path, cfg) == coulomb_potential(end, cfg)

    def test_beta_zero_singular_at_charge(self):
        """Test that a beta = 0 path ending on a charge raises."""
        cfg = DipoleConfig(separation=2.0, beta=0.0)

        with pytest.raises(SingularityError):
            line_integral_potential(axial_path_a(cfg), cfg)

    def test_beta_zero_circulation_vanishes(self):
        """Test zero circulation on random loops for beta = 0."""
        cfg = DipoleConfig(separation=2.0, beta=0.0)
        rng = np.random.default_rng(3)

        for _ in range(10):
            assert circulation(random_loop(rng, cfg), cfg) == 0.0

    def test_random_loop_gives_up(self, mocker):
        """Test that a generator never clearing the charges raises."""
        cfg = DipoleConfig(separation=2.0, beta=0.3)
        rng = mocker.Mock()
        rng.uniform.return_value = np.array([[0.0, 0.0, -4.0], [0.0, 0.0, 4.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]])

        with pytest.raises(InvalidInputError) as excinfo:
            random_loop(rng, cfg, max_attempts=5)
        assert excinfo.value.context["max_attempts"] == 5
        assert rng.uniform.call_count == 5

    def test_path_potential_decomposition(self, cfg):
        """Test phi(end) = Born pair value minus the remainder integral."""
        path = axial_path_a(cfg)
        expected = born_pair_potential(path.end, cfg) - remainder_integral(path, cfg)

        assert line_integral_potential(path, cfg) == pytest.approx(expected, abs=1e-12)

    def test_path_potentials(self, cfg):
        """Test the A/B pair helper."""
        phi_a, phi_b = path_potentials(cfg)

        assert phi_a == pytest.approx(line_integral_potential(axial_path_a(cfg), cfg), abs=1e-12)
        assert phi_b == pytest.approx(line_integral_potential(axial_path_b(cfg), cfg), abs=1e-12)
        assert abs(phi_a - phi_b) > 1e-8

    def test_reflection_antisymmetry(self, cfg):
        """Test phi at a mirrored end point changes sign."""
        path = Path((Vec3(3.0, 0.0, -5.0), Vec3(0.5, 0.2, -0.3)))

        a = line_integral_potential(path, cfg)
        b = line_integral_potential(path.mirrored(), cfg)

        assert abs(a + b) <= 1e-9

    def test_remainder_additive_over_waypoints(self, cfg):
        """Test that splitting a path at a waypoint preserves the integral."""
        a, b, c = Vec3(4.0, 0.0, -3.0), Vec3(1.0, 0.5, 0.2), Vec3(0.2, 0.0, 1.5)

        whole = remainder_integral(Path((a, b, c)), cfg)
        parts = remainder_integral(Path((a, b)), cfg) + remainder_integral(Path((b, c)), cfg)

        assert whole == pytest.approx(parts, abs=1e-9)

    def test_circulation_nonzero_and_oriented(self, cfg):
        """Test that the proton-side loop circulates and reversal flips the sign."""
        loop = proton_side_loop(cfg)
        reverse = Path(tuple(reversed(loop.waypoints)), closed=True)

        forward = circulation(loop, cfg)

        assert abs(forward) > 1e-8
        assert circulation(reverse, cfg) == pytest.approx(-forward, abs=1e-9)

    def test_circulation_needs_closed_path(self, cfg):
        """Test argument validation."""
        with pytest.raises(InvalidInputError):
            circulation(axial_path_a(cfg), cfg)
        with pytest.raises(InvalidInputError):
            line_integral_potential(proton_side_loop(cfg), cfg)

    def test_loop_through_charge_raises(self, cfg):
        """Test that a loop touching the proton is rejected."""
        loop = meridian_loop((0.0, 1.0), (0.0, 2.0))

        with pytest.raises(SingularityError):
            circulation(loop, cfg)

    def test_quadrature_metrics_recorded(self, cfg):
        """Test that path integrals count their pieces."""
        registry = get_solver_metrics().registry
        before = registry.get_sample_value("borninfeld_quadrature_segments_total") or 0.0

        remainder_integral(axial_path_a(cfg), cfg)

        assert registry.get_sample_value("borninfeld_quadrature_segments_total") > before
