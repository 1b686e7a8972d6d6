"""
Sweep manager for borninfeld-lab.

Runs the (beta, r) points of a parameter sweep on a bounded worker pool and
hands back one outcome per point in input order, whatever the completion
order. Failures are captured per point so one bad point never sinks a sweep.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from borninfeld.config.config_loader import GridSettings, PotentialMethod, QuadratureSettings, RadialSettings
from borninfeld.exceptions import BornLabError, EXIT_OK
from borninfeld.extraction.potential_extraction import RadialPotential, extract_path, report_flags, sample_potential
from borninfeld.fields.bi_fields import DipoleConfig
from borninfeld.fields.paths import circulation, proton_side_loop
from borninfeld.logging.logger import create_run_logger
from borninfeld.solvers.schrodinger import RadialMesh, SpectrumResult, spectrum_shifts
from borninfeld.storage.solution_store import save_solution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepPoint:
    """One (beta, r) point of a sweep."""

    beta: float
    separation: float


@dataclass
class SweepOutcome:
    """Result or captured failure of one sweep point."""

    point: SweepPoint
    values: Dict[str, Any] = field(default_factory=dict)
    error: Optional[BornLabError] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.error is None else self.error.exit_code


def grid_points(betas: Sequence[float], separations: Sequence[float]) -> List[SweepPoint]:
    """Cartesian product, beta outer and r inner."""
    return [SweepPoint(float(b), float(r)) for b in betas for r in separations]


def audit_point(point: SweepPoint, quadrature: Optional[QuadratureSettings] = None) -> Dict[str, float]:
    """
    Path A / path B potentials and the proton-side loop circulation.

    Args:
        point: Sweep point
        quadrature: Quadrature settings

    Returns:
        Row with keys beta, r, V_A, V_B, delta, circulation
    """
    quadrature = quadrature or QuadratureSettings()
    cfg = DipoleConfig(separation=point.separation, beta=point.beta)
    _, v_a = extract_path(cfg, PotentialMethod.PATH_A, quadrature.tol)
    _, v_b = extract_path(cfg, PotentialMethod.PATH_B, quadrature.tol)
    loop = circulation(proton_side_loop(cfg), cfg, quadrature.tol, quadrature.limit)
    return {
        "beta": point.beta,
        "r": point.separation,
        "V_A": v_a,
        "V_B": v_b,
        "delta": v_a - v_b,
        "circulation": loop,
    }


def solution_filename(point: SweepPoint) -> str:
    return f"solution_beta{point.beta!r}_r{point.separation!r}.txt"


class SweepManager:
    """
    Coordinates sweep points on a bounded thread pool.
    """

    def __init__(self, max_workers: int = 1):
        """
        Initialize sweep manager.

        Args:
            max_workers: Maximum parallel workers
        """
        self.max_workers = max(1, int(max_workers))
        self.logger = logging.getLogger(__name__)

    def run(
        self, task: Callable[[SweepPoint], Dict[str, Any]], points: Iterable[SweepPoint]
    ) -> List[SweepOutcome]:
        """
        Evaluate task at every point.

        Args:
            task: Callable returning a row for one point
            points: Sweep points

        Returns:
            One outcome per point, in input order
        """
        points = list(points)

        def guarded(point: SweepPoint) -> SweepOutcome:
            run_logger = create_run_logger(self.logger, point.beta, point.separation)
            try:
                return SweepOutcome(point, task(point))
            except BornLabError as e:
                run_logger.error(f"Sweep point failed: {e.message}", extra={"event_type": "sweep_point_failed"})
                run_logger.debug("Sweep point traceback", exc_info=True)
                return SweepOutcome(point, error=e)

        if self.max_workers == 1 or len(points) <= 1:
            outcomes = [guarded(p) for p in points]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                outcomes = list(executor.map(guarded, points))

        failed = sum(1 for o in outcomes if not o.ok)
        self.logger.info(
            f"Sweep finished: {len(outcomes) - failed}/{len(outcomes)} points succeeded",
            extra={"event_type": "sweep_done"},
        )
        return outcomes

    def audit(
        self,
        betas: Sequence[float],
        separations: Sequence[float],
        quadrature: Optional[QuadratureSettings] = None,
    ) -> List[SweepOutcome]:
        """Path-dependence audit rows over the beta x r product."""
        return self.run(lambda p: audit_point(p, quadrature), grid_points(betas, separations))

    def minimize(
        self,
        betas: Sequence[float],
        separations: Sequence[float],
        grid: Optional[GridSettings] = None,
        quadrature: Optional[QuadratureSettings] = None,
        method: PotentialMethod = PotentialMethod.VARIATIONAL,
        solution_dir: Optional[Path] = None,
    ) -> Tuple[List[SweepOutcome], List[RadialPotential]]:
        """
        Sample V at every point and assemble one table per beta.

        Args:
            betas: Born parameters
            separations: Strictly increasing separations
            grid: Grid and minimizer settings
            quadrature: Quadrature settings for path methods
            method: Potential estimator
            solution_dir: Directory for variational solution files (skipped if None)

        Returns:
            Tuple of per-point outcomes and the potentials of betas whose
            points all succeeded
        """
        method = PotentialMethod(method)

        def task(point: SweepPoint) -> Dict[str, Any]:
            (r, v), sol = sample_potential(point.beta, point.separation, method, grid, quadrature)
            row: Dict[str, Any] = {"r": r, "V": v, "beta": point.beta, "method": method.value}
            if sol is not None and solution_dir is not None:
                row["solution"] = str(save_solution(sol, Path(solution_dir) / solution_filename(point)))
            return row

        outcomes = self.run(task, grid_points(betas, separations))

        potentials = []
        for beta in betas:
            members = [o for o in outcomes if o.point.beta == float(beta)]
            if not all(o.ok for o in members):
                continue
            potential = RadialPotential(
                r=np.array([o.values["r"] for o in members]),
                V=np.array([o.values["V"] for o in members]),
                beta=float(beta),
                method=method.value,
            )
            report_flags(potential)
            potentials.append(potential)
        return outcomes, potentials

    def spectra(
        self,
        potentials: Sequence[RadialPotential],
        radial: Optional[RadialSettings] = None,
    ) -> List[SpectrumResult]:
        """
        Level shifts for each potential, in input order.

        Raises:
            PartialSpectrumError: If a potential binds fewer states than requested
        """
        radial = radial or RadialSettings()
        mesh = RadialMesh.from_settings(radial)

        def one(potential: RadialPotential) -> SpectrumResult:
            return spectrum_shifts(
                potential, radial.n_max, radial.ell_max, mesh, beta=potential.beta, method=potential.method
            )

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            return list(executor.map(one, potentials))
