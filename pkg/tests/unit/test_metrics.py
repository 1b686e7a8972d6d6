"""
Unit tests for solver metrics.
"""

import pytest

from borninfeld.exceptions import PersistenceError
from borninfeld.fields.bi_fields import DipoleConfig
from borninfeld.fields.paths import axial_path_a, line_integral_potential
from borninfeld.metrics.solver_metrics import SolverMetrics, get_solver_metrics
from borninfeld.solvers.action_minimizer import minimize
from borninfeld.solvers.axisym_grid import build_grid


class TestSolverMetrics:
    """Tests for solver metrics."""

    @pytest.fixture
    def metrics(self):
        """Create solver metrics on a private registry."""
        return SolverMetrics(namespace="test")

    def test_init(self, metrics):
        """Test metrics initialization."""
        assert metrics.namespace == "test"
        assert metrics.registry.get_sample_value("test_quadrature_segments_total") == 0.0

    def test_record_solve(self, metrics):
        """Test recording a converged and a failed solve."""
        metrics.record_solve("odd", converged=True, iterations=40, duration=0.5, grad_norm=1e-9)
        metrics.record_solve("odd", converged=False, iterations=100, duration=2.0, grad_norm=1e-3)

        sample = metrics.registry.get_sample_value
        assert sample("test_solves_total", {"parity": "odd", "status": "converged"}) == 1.0
        assert sample("test_solves_total", {"parity": "odd", "status": "failed"}) == 1.0
        assert sample("test_solve_iterations_count", {"parity": "odd"}) == 2.0
        assert sample("test_solve_iterations_sum", {"parity": "odd"}) == 140.0
        assert sample("test_last_grad_norm", {"parity": "odd"}) == 1e-3

    def test_record_quadrature(self, metrics):
        """Test recording path integrals."""
        metrics.record_quadrature(6)
        metrics.record_quadrature(4, failed=True)

        assert metrics.registry.get_sample_value("test_quadrature_segments_total") == 10.0
        assert metrics.registry.get_sample_value("test_quadrature_failures_total") == 1.0

    def test_record_eigensolve(self, metrics):
        """Test recording eigen-solves per orbital quantum number."""
        metrics.record_eigensolve(0)
        metrics.record_eigensolve(0)
        metrics.record_eigensolve(2)

        assert metrics.registry.get_sample_value("test_eigensolves_total", {"ell": "0"}) == 2.0
        assert metrics.registry.get_sample_value("test_eigensolves_total", {"ell": "2"}) == 1.0

    def test_instances_are_isolated(self):
        """Test that separate instances do not collide."""
        first = SolverMetrics(namespace="test")
        second = SolverMetrics(namespace="test")
        first.record_eigensolve(1)

        assert second.registry.get_sample_value("test_eigensolves_total", {"ell": "1"}) is None

    def test_metrics_summary(self, metrics):
        """Test totals across labels."""
        metrics.record_solve("odd", converged=True, iterations=40, duration=0.5, grad_norm=1e-9)
        metrics.record_solve("even", converged=True, iterations=30, duration=0.5, grad_norm=1e-9)
        metrics.record_solve("odd", converged=False, iterations=100, duration=2.0, grad_norm=1e-3)
        metrics.record_quadrature(5, failed=True)
        metrics.record_eigensolve(0)
        metrics.record_eigensolve(1)

        assert metrics.get_metrics_summary() == {
            "solves_converged": 2.0,
            "solves_failed": 1.0,
            "quadrature_segments": 5.0,
            "quadrature_failures": 1.0,
            "eigensolves": 2.0,
        }

    def test_write_textfile(self, metrics, tmp_path):
        """Test the Prometheus text export."""
        metrics.record_solve("odd", converged=True, iterations=40, duration=0.5, grad_norm=1e-9)

        path = metrics.write_textfile(tmp_path / "out" / "metrics.prom")
        text = path.read_text()

        assert 'test_solves_total{parity="odd",status="converged"} 1.0' in text
        assert "test_quadrature_segments_total 0.0" in text

    def test_write_textfile_unwritable(self, metrics, tmp_path):
        """Test that an unwritable destination raises PersistenceError."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")

        with pytest.raises(PersistenceError) as excinfo:
            metrics.write_textfile(blocker / "metrics.prom")
        assert "metrics.prom" in excinfo.value.message


class TestGlobalMetrics:
    """Tests for the shared instance."""

    def test_singleton(self):
        """Test that the global instance is reused."""
        assert get_solver_metrics() is get_solver_metrics()

    def test_kernels_report_quadrature(self):
        """Test that path integrals feed the shared counters."""
        metrics = get_solver_metrics()
        before = metrics.registry.get_sample_value("borninfeld_quadrature_segments_total")

        cfg = DipoleConfig(separation=2.0, beta=0.3)
        line_integral_potential(axial_path_a(cfg), cfg)

        assert metrics.registry.get_sample_value("borninfeld_quadrature_segments_total") > before

    def test_minimize_reports_solve(self):
        """Test that a minimization feeds the shared solve counters."""
        metrics = get_solver_metrics()
        before = metrics.get_metrics_summary()["solves_converged"]

        cfg = DipoleConfig(separation=2.0, beta=0.1)
        minimize(build_grid(cfg, 17, 17, 5.0), cfg)

        assert metrics.get_metrics_summary()["solves_converged"] == before + 1
        assert metrics.registry.get_sample_value("borninfeld_last_grad_norm", {"parity": "odd"}) <= 1e-8
