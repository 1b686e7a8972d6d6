"""
Unit tests for interaction potential extraction.
"""

import dataclasses
import logging
from unittest.mock import patch

import numpy as np
import pytest

from borninfeld.config.config_loader import GridSettings, PotentialMethod
from borninfeld.exceptions import DomainError, ExtractionError, InvalidInputError
from borninfeld.extraction.potential_extraction import (
    RadialPotential,
    extract_path,
    extract_variational,
    report_flags,
    sample_potential,
    tabulate,
)
from borninfeld.fields.bi_fields import DipoleConfig, exact_born_potential
from borninfeld.fields.paths import axial_path_a, axial_path_b, line_integral_potential
from borninfeld.solvers.action_minimizer import Parity, minimize
from borninfeld.solvers.axisym_grid import build_grid


class TestExtractPath:
    """Tests for the line-integral estimators."""

    @pytest.mark.parametrize("choice", ["A", "B", "path_A", PotentialMethod.PATH_B])
    def test_coulomb_at_beta_zero(self, choice):
        """Test V = -1/r exactly for beta = 0."""
        r, v = extract_path(DipoleConfig(separation=2.0, beta=0.0), choice)

        assert r == 2.0
        assert v == -0.5

    def test_matches_line_integral(self):
        """Test V = -(phi_path(electron) - phi_inf) with phi_inf = -phi_Born(0)."""
        cfg = DipoleConfig(separation=1.0, beta=0.3)
        phi_inf = -exact_born_potential(0.0, cfg.beta)

        _, v_a = extract_path(cfg, "A")
        _, v_b = extract_path(cfg, "B")

        assert v_a == pytest.approx(-(line_integral_potential(axial_path_a(cfg), cfg) - phi_inf), abs=1e-9)
        assert v_b == pytest.approx(-(line_integral_potential(axial_path_b(cfg), cfg) - phi_inf), abs=1e-9)
        assert abs(v_a - v_b) > 1e-8

    def test_finite_at_short_range(self):
        """Test that path estimates stay finite for r below beta."""
        _, v = extract_path(DipoleConfig(separation=0.1, beta=0.3), "B")

        assert np.isfinite(v)

    def test_unknown_path(self):
        """Test path choice validation."""
        with pytest.raises(InvalidInputError):
            extract_path(DipoleConfig(separation=1.0, beta=0.1), "C")


class TestExtractVariational:
    """Tests for the variational estimator."""

    def test_coulomb_limit(self):
        """Test V(2) close to -1/2 for beta = 0."""
        cfg = DipoleConfig(separation=2.0, beta=0.0)
        sol = minimize(build_grid(cfg, 65, 65, 10.0), cfg)

        r, v = extract_variational(sol)

        assert r == 2.0
        assert abs(v + 0.5) <= 0.02

    def test_explicit_self_value(self):
        """Test subtraction of a given isolated-charge value."""
        cfg = DipoleConfig(separation=2.0, beta=0.2)
        sol = minimize(build_grid(cfg, 17, 17, 5.0), cfg)

        _, v = extract_variational(sol, self_value=1.25)

        assert v == pytest.approx(sol.source_value - 1.25, abs=1e-15)

    def test_rejects_unconverged(self):
        """Test that unconverged solutions are refused."""
        cfg = DipoleConfig(separation=2.0, beta=0.2)
        sol = minimize(build_grid(cfg, 17, 17, 5.0), cfg)
        stale = dataclasses.replace(sol, report=dataclasses.replace(sol.report, converged=False))

        with pytest.raises(InvalidInputError):
            extract_variational(stale)

    def test_rejects_even_parity(self):
        """Test that isolated-charge solutions are refused."""
        cfg = DipoleConfig(separation=2.0, beta=0.2)
        sol = minimize(build_grid(cfg, 17, 17, 5.0), cfg, parity=Parity.EVEN)

        with pytest.raises(InvalidInputError):
            extract_variational(sol)


class TestSamplePotential:
    """Tests for single samples."""

    def test_path_method_has_no_solution(self):
        """Test that path samples return no field."""
        sample, sol = sample_potential(0.0, 1.0, PotentialMethod.PATH_A)

        assert sample == (1.0, -1.0)
        assert sol is None

    def test_variational_returns_solution(self):
        """Test that variational samples carry their dipole field."""
        grid = GridSettings(n_rho=17, n_z=17, extent_factor=5.0)
        (r, v), sol = sample_potential(0.2, 2.0, "variational", grid=grid)

        assert r == 2.0
        assert sol is not None and sol.report.converged
        assert v < 0.0


class TestTabulate:
    """Tests for potential tables."""

    def test_path_table(self):
        """Test a beta = 0 path table with concurrent workers."""
        rs = [0.5, 1.0, 2.0, 4.0]
        potential = tabulate(0.0, rs, PotentialMethod.PATH_A, workers=2)

        assert isinstance(potential, RadialPotential)
        assert np.array_equal(potential.r, rs)
        assert np.array_equal(potential.V, -1.0 / np.array(rs))
        assert potential.is_attractive and potential.is_monotone
        assert potential.method == "path_A"

    def test_born_table_attractive(self):
        """Test attraction and monotonicity for beta > 0."""
        potential = tabulate(0.3, [1.0, 2.0, 4.0], "path_B")

        assert potential.is_attractive
        assert potential.is_monotone

    @pytest.mark.slow
    def test_default_grid_variational_table(self):
        """Test a beta = 0.3 variational table at the default grid and tolerance."""
        rs = [0.2, 0.5, 1.0, 2.0, 4.0, 10.0]
        potential = tabulate(0.3, rs, PotentialMethod.VARIATIONAL, grid=GridSettings(), workers=2)

        assert np.array_equal(potential.r, rs)
        assert np.all(np.isfinite(potential.V))
        assert potential.is_attractive

    @pytest.mark.parametrize("rs", [[], [1.0, 1.0], [2.0, 1.0], [-1.0, 1.0]])
    def test_invalid_separations(self, rs):
        """Test separation list validation."""
        with pytest.raises(InvalidInputError):
            tabulate(0.0, rs, "path_A")

    def test_failure_names_separation(self):
        """Test that a failed member is reported with its separation."""
        def flaky(beta, r, method, grid, quadrature):
            if r == 2.0:
                raise DomainError("boom")
            return (r, -1.0 / r), None

        with patch("borninfeld.extraction.potential_extraction.sample_potential", side_effect=flaky):
            with pytest.raises(ExtractionError) as excinfo:
                tabulate(0.1, [1.0, 2.0, 4.0], "path_A", workers=3)

        assert excinfo.value.separation == 2.0
        assert "boom" in excinfo.value.message


class TestReportFlags:
    """Tests for diagnostic warnings."""

    def test_softening_violation_logged(self, caplog):
        """Test that V < -1/r is reported as a warning."""
        potential = RadialPotential(r=np.array([1.0, 2.0]), V=np.array([-1.2, -0.5]), beta=0.3, method="variational")

        with caplog.at_level(logging.WARNING, logger="borninfeld"):
            report_flags(potential)

        assert any(getattr(rec, "event_type", None) == "softening_violation" for rec in caplog.records)

    def test_non_monotone_logged(self, caplog):
        """Test that a non-monotone table is reported."""
        potential = RadialPotential(r=np.array([1.0, 2.0]), V=np.array([-0.5, -0.6]), beta=0.3, method="path_A")

        with caplog.at_level(logging.WARNING, logger="borninfeld"):
            report_flags(potential)

        assert any(getattr(rec, "event_type", None) == "non_monotone" for rec in caplog.records)

    def test_clean_table_silent(self, caplog):
        """Test that a well-behaved table logs nothing."""
        potential = RadialPotential(r=np.array([1.0, 2.0]), V=np.array([-0.9, -0.45]), beta=0.3, method="path_A")

        with caplog.at_level(logging.WARNING, logger="borninfeld"):
            report_flags(potential)

        assert not caplog.records
