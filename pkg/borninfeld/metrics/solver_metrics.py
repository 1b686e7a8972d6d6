"""
Prometheus metrics for borninfeld-lab numerical kernels.

Tracks minimizer solves, quadrature segments and eigen-solves so that long
parameter sweeps can be monitored. Collectors live on a private registry that
the command line writes out as a Prometheus textfile and summarizes in the log.
"""

import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

from borninfeld.exceptions import PersistenceError

logger = logging.getLogger(__name__)


class SolverMetrics:
    """
    Metrics collection for the numerical kernels.

    Tracks solve outcomes, iteration counts, wall time, quadrature activity
    and eigen-solves.
    """

    def __init__(self, namespace: str = "borninfeld", registry: Optional[CollectorRegistry] = None):
        """
        Initialize solver metrics.

        Args:
            namespace: Prometheus namespace for metrics
            registry: Registry to attach collectors to (default: a fresh one)
        """
        self.namespace = namespace
        self.registry = registry if registry is not None else CollectorRegistry()

        # Minimizer metrics
        self.solves_total = Counter(
            f"{namespace}_solves_total",
            "Total number of action minimizations",
            ["parity", "status"],  # status: converged, failed
            registry=self.registry,
        )

        self.solve_duration_seconds = Histogram(
            f"{namespace}_solve_duration_seconds",
            "Wall time of action minimizations in seconds",
            ["parity"],
            buckets=[0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0],
            registry=self.registry,
        )

        self.solve_iterations = Histogram(
            f"{namespace}_solve_iterations",
            "Iterations used per minimization",
            ["parity"],
            buckets=[1, 5, 10, 25, 50, 100, 250, 1000, 10000, 100000],
            registry=self.registry,
        )

        self.last_grad_norm = Gauge(
            f"{namespace}_last_grad_norm",
            "Final gradient norm of the most recent minimization",
            ["parity"],
            registry=self.registry,
        )

        # Quadrature metrics
        self.quadrature_segments_total = Counter(
            f"{namespace}_quadrature_segments_total",
            "Total path pieces integrated",
            registry=self.registry,
        )

        self.quadrature_failures_total = Counter(
            f"{namespace}_quadrature_failures_total",
            "Total path integrals that missed their tolerance",
            registry=self.registry,
        )

        # Eigensolver metrics
        self.eigensolves_total = Counter(
            f"{namespace}_eigensolves_total",
            "Total radial eigen-solves",
            ["ell"],
            registry=self.registry,
        )

        logger.debug(f"Solver metrics initialized with namespace: {namespace}")

    def record_solve(self, parity: str, converged: bool, iterations: int, duration: float, grad_norm: float) -> None:
        """
        Record one minimization.

        Args:
            parity: Mirror parity of the problem (odd, even)
            converged: Whether the tolerance was reached
            iterations: Iterations used
            duration: Wall time in seconds
            grad_norm: Final gradient norm
        """
        status = "converged" if converged else "failed"
        self.solves_total.labels(parity=parity, status=status).inc()
        self.solve_duration_seconds.labels(parity=parity).observe(duration)
        self.solve_iterations.labels(parity=parity).observe(iterations)
        self.last_grad_norm.labels(parity=parity).set(grad_norm)

    def record_quadrature(self, segments: int, failed: bool = False) -> None:
        """
        Record one path integral.

        Args:
            segments: Number of pieces integrated
            failed: Whether the tolerance was missed
        """
        self.quadrature_segments_total.inc(segments)
        if failed:
            self.quadrature_failures_total.inc()

    def record_eigensolve(self, ell: int) -> None:
        """
        Record one radial eigen-solve.

        Args:
            ell: Orbital quantum number
        """
        self.eigensolves_total.labels(ell=str(ell)).inc()

    def get_metrics_summary(self) -> Dict[str, float]:
        """
        Get a summary of current metrics.

        Returns:
            Totals of solves by status, quadrature pieces and failures, and
            eigen-solves
        """
        ns = self.namespace
        summary = {
            "solves_converged": 0.0,
            "solves_failed": 0.0,
            "quadrature_segments": 0.0,
            "quadrature_failures": 0.0,
            "eigensolves": 0.0,
        }
        for metric in self.registry.collect():
            for sample in metric.samples:
                if sample.name == f"{ns}_solves_total":
                    summary[f"solves_{sample.labels['status']}"] += sample.value
                elif sample.name == f"{ns}_quadrature_segments_total":
                    summary["quadrature_segments"] += sample.value
                elif sample.name == f"{ns}_quadrature_failures_total":
                    summary["quadrature_failures"] += sample.value
                elif sample.name == f"{ns}_eigensolves_total":
                    summary["eigensolves"] += sample.value
        return summary

    def write_textfile(self, path: Union[str, Path]) -> Path:
        """
        Write the registry in the Prometheus text exposition format.

        Args:
            path: Destination file, e.g. for the node exporter textfile collector

        Returns:
            Path written

        Raises:
            PersistenceError: If the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            write_to_textfile(str(path), self.registry)
        except OSError as e:
            raise PersistenceError(f"cannot write metrics file {path}: {e}", path=path) from e
        logger.info(f"Metrics written to {path}")
        return path


# Global solver metrics instance
_solver_metrics: Optional[SolverMetrics] = None
_lock = threading.Lock()


def get_solver_metrics() -> SolverMetrics:
    """
    Get global solver metrics instance.

    Returns:
        SolverMetrics instance
    """
    global _solver_metrics
    with _lock:
        if _solver_metrics is None:
            _solver_metrics = SolverMetrics()
    return _solver_metrics
