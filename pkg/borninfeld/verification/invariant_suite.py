"""
Desk-scale invariant suite.

Every check exercises one documented property of the laboratory on small
grids and meshes and reports PASS or FAIL with a one-line detail. The suite
backs ``borninfeld verify``; the unit tests cover the same properties
individually.
"""

import logging
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from borninfeld.config.config_loader import GridSettings, PotentialMethod, load_config
from borninfeld.exceptions import BornLabError, ConfigurationError, InvalidInputError
from borninfeld.extraction.potential_extraction import RadialPotential, extract_variational, report_flags, tabulate
from borninfeld.fields.bi_fields import (
    DipoleConfig,
    Vec3,
    born_potential_quadrature,
    d_from_e,
    e_from_d,
    exact_born_potential,
)
from borninfeld.fields.paths import (
    Path as FieldPath,
    axial_path_a,
    circulation,
    line_integral_potential,
    proton_side_loop,
    random_loop,
)
from borninfeld.solvers.action_minimizer import (
    FEASIBILITY_EPS,
    PotentialSolution,
    coulomb_reference_error,
    get_problem,
    minimize,
    project_feasible,
)
from borninfeld.solvers.axisym_grid import build_grid
from borninfeld.solvers.schrodinger import (
    RadialMesh,
    born_monopole_potential,
    coulomb_potential_radial,
    overlap,
    solve_radial,
    spectrum_shifts,
)
from borninfeld.storage.solution_store import DEFAULT_TOL, load_solution, save_solution
from borninfeld.storage.tables import write_audit_csv, write_potential_csv
from borninfeld.sweep_manager import SweepPoint, audit_point

logger = logging.getLogger(__name__)

Outcome = Tuple[bool, str]

# Relative accuracy of the Coulomb levels on the default mesh
LEVEL_TOL = 1e-5


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    passed: bool
    detail: str
    duration: float = 0.0

    def line(self) -> str:
        return f"PASS {self.name}" if self.passed else f"FAIL {self.name}: {self.detail}"


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)), 1)[0])


def observed_order(h: Sequence[float], errors: Sequence[float]) -> float:
    """Convergence order between the two finest levels."""
    return math.log(errors[-2] / errors[-1]) / math.log(h[-2] / h[-1])


def axis_regularity(sol: PotentialSolution, exclusion: float) -> Tuple[float, float]:
    """
    Largest first radial difference at the axis and its expected scale.

    Away from the charges phi(h, z) - phi(0, z) is second order in h_rho,
    about -phi_zz h_rho^2 / 4 for a harmonic field.

    Returns:
        (max |phi[:, 1] - phi[:, 0]|, h_rho^2 * max |phi_zz|) over axis rows
        farther than exclusion from both charges
    """
    g = sol.grid
    z = g.z[1:-1]
    far = (np.abs(z - 0.5 * sol.cfg.separation) > exclusion) & (np.abs(z + 0.5 * sol.cfg.separation) > exclusion)
    axis = sol.phi[:, 0]
    phi_zz = (axis[2:] - 2.0 * axis[1:-1] + axis[:-2]) / g.h_z**2
    radial = np.abs(sol.phi[1:-1, 1] - sol.phi[1:-1, 0])
    return float(np.max(radial[far])), float(g.h_rho**2 * np.max(np.abs(phi_zz[far])))


class InvariantSuite:
    """
    Runs the invariant checks and collects their results.

    Checks are named by ``CHECKS`` and implemented by ``check_<name>``
    methods returning ``(passed, detail)``. Errors raised inside a check turn
    into a failed result.
    """

    CHECKS: Tuple[str, ...] = (
        "constitutive_round_trip",
        "saturation_bound",
        "born_oracle",
        "born_monotonicity",
        "beta_zero_circulation",
        "path_dependence",
        "path_scaling",
        "reflection_antisymmetry",
        "gradient_check",
        "maxwell_limit",
        "descent_and_symmetry",
        "uniqueness",
        "beta4_departure",
        "potential_properties",
        "hydrogen_baseline",
        "centrifugal_guard",
        "orthonormality",
        "shift_positivity",
        "variational_spectrum",
        "mesh_refinement",
        "config_totality",
        "csv_determinism",
        "solution_round_trip",
    )

    def __init__(
        self,
        inject_centrifugal_bug: bool = False,
        solution_files: Iterable[Union[str, Path]] = (),
        mesh: Optional[RadialMesh] = None,
        quadrature_tol: float = 1e-10,
        seed: int = 20240601,
        solution_tol: float = DEFAULT_TOL,
    ):
        """
        Initialize suite.

        Args:
            inject_centrifugal_bug: Double the centrifugal term in every
                eigen-solve (exercises the hydrogen guards)
            solution_files: Existing solution files to round-trip
            mesh: Radial mesh for the spectrum checks
            quadrature_tol: Line-integral error budget
            seed: Random seed for loops and directions
            solution_tol: Gradient tolerance a stored solution must still meet
        """
        self.centrifugal_scale = 2.0 if inject_centrifugal_bug else 1.0
        self.solution_files = [Path(p) for p in solution_files]
        self.mesh = mesh or RadialMesh()
        self.tol = quadrature_tol
        self.seed = seed
        self.solution_tol = solution_tol

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def run(self, only: Optional[Iterable[str]] = None) -> List[CheckResult]:
        """
        Run checks in suite order.

        Args:
            only: Restrict to these check names

        Returns:
            One result per check (one per file for solution_round_trip when
            files were given)

        Raises:
            InvalidInputError: For unknown check names
        """
        selected = list(self.CHECKS) if not only else list(only)
        unknown = [n for n in selected if n not in self.CHECKS]
        if unknown:
            raise InvalidInputError(f"unknown check(s): {', '.join(unknown)}", checks=unknown)

        results: List[CheckResult] = []
        for name in self.CHECKS:
            if name not in selected:
                continue
            if name == "solution_round_trip" and self.solution_files:
                for path in self.solution_files:
                    results.append(self._timed(name, lambda p=path: self.check_solution_file(p)))
            else:
                results.append(self._timed(name, getattr(self, f"check_{name}")))

        failed = [r.name for r in results if not r.passed]
        logger.info(
            f"Invariant suite: {len(results) - len(failed)}/{len(results)} checks passed",
            extra={"component": "verification", "event_type": "verify_done"},
        )
        return results

    def _timed(self, name: str, check: Callable[[], Outcome]) -> CheckResult:
        started = time.perf_counter()
        try:
            passed, detail = check()
        except BornLabError as e:
            passed, detail = False, f"{type(e).__name__}: {e.message}"
            logger.debug(f"Check {name} raised", exc_info=True)
        duration = time.perf_counter() - started
        level = logging.INFO if passed else logging.WARNING
        logger.log(
            level,
            f"{name}: {'pass' if passed else 'FAIL'} ({detail}) in {duration:.2f}s",
            extra={"component": "verification", "event_type": "check_result"},
        )
        return CheckResult(name=name, passed=bool(passed), detail=detail, duration=duration)

    # Constitutive relation and single-charge oracle

    def check_constitutive_round_trip(self) -> Outcome:
        rng = self._rng()
        worst = 0.0
        for beta in (0.0, 1e-3, 1.0, 1e3):
            scale = 1.0 if beta == 0.0 else beta**-2
            mags = np.logspace(-8.0, 4.0, 25) * scale
            dirs = rng.normal(size=(mags.size, 3))
            D = dirs / np.linalg.norm(dirs, axis=1, keepdims=True) * mags[:, None]
            back = d_from_e(e_from_d(D, beta), beta)
            err = np.linalg.norm(back - D, axis=1) / mags
            bound = 1e-12 + 2e-15 * beta**4 * mags**2
            worst = max(worst, float(np.max(err / bound)))
        return worst <= 1.0, f"worst error/bound ratio {worst:.3g}"

    def check_saturation_bound(self) -> Outcome:
        strict = 0.0
        for beta in (1e-3, 1.0, 1e3):
            x = np.logspace(-6.0, 7.0, 27)
            D = np.zeros((x.size, 3))
            D[:, 2] = x / beta**2
            ratio = beta**2 * np.linalg.norm(e_from_d(D, beta), axis=1)
            strict = max(strict, float(np.max(ratio)))
        return strict < 1.0, f"max beta^2|E| = {strict:.17g} for beta^2|D| up to 1e7"

    def check_born_oracle(self) -> Outcome:
        closed = exact_born_potential(0.0, 1.0)
        oracle = born_potential_quadrature(0.0, 1.0, tol=1e-13)
        s = np.logspace(-3.0, 3.0, 13)
        coulomb = float(np.max(np.abs(exact_born_potential(s, 0.0) - 1.0 / s) * s))
        pairs = [(0.3, 0.5), (2.0, 0.5), (0.0, 0.1), (5.0, 2.0)]
        spread = max(abs(exact_born_potential(a, b) - born_potential_quadrature(a, b)) for a, b in pairs)
        ok = abs(closed - oracle) <= 1e-8 and coulomb <= 4e-16 and spread <= 1e-10
        return ok, f"phi(0,1)={closed:.12f} oracle={oracle:.12f}; beta=0 rel {coulomb:.1e}; spread {spread:.1e}"

    def check_born_monotonicity(self) -> Outcome:
        s = np.linspace(0.0, 10.0, 201)
        in_s = np.all(np.diff(exact_born_potential(s, 0.5)) < 0)
        betas = np.linspace(0.05, 3.0, 60)
        in_beta = np.all(np.diff([exact_born_potential(1.0, b) for b in betas]) < 0)
        return bool(in_s and in_beta), f"decreasing in s: {bool(in_s)}, in beta: {bool(in_beta)}"

    # Coulomb-approximation path integrals

    def check_beta_zero_circulation(self) -> Outcome:
        rng = self._rng()
        cfg = DipoleConfig(separation=2.0, beta=0.0)
        worst = max(abs(circulation(random_loop(rng, cfg), cfg, self.tol)) for _ in range(100))
        return worst <= self.tol, f"max |circulation| over 100 loops {worst:.2e}"

    def check_path_dependence(self) -> Outcome:
        details = []
        ok = True
        for beta in (0.0, 0.1, 0.3):
            row = audit_point(SweepPoint(beta, 2.0))
            delta, loop = abs(row["delta"]), abs(row["circulation"])
            if beta == 0.0:
                ok &= delta <= self.tol and loop <= self.tol and abs(row["V_A"] + 0.5) <= self.tol
            else:
                ok &= delta > 100.0 * self.tol and loop > 100.0 * self.tol
            details.append(f"beta={beta:g}: |delta|={delta:.3e} |circ|={loop:.3e}")
        return ok, "; ".join(details)

    def check_path_scaling(self) -> Outcome:
        betas = [0.01, 0.02, 0.04]
        deltas = []
        loops = []
        for beta in betas:
            cfg = DipoleConfig(separation=2.0, beta=beta)
            row = audit_point(SweepPoint(beta, 2.0))
            deltas.append(abs(row["delta"]))
            loops.append(abs(circulation(proton_side_loop(cfg), cfg, tol=1e-15)))
        slope_delta = loglog_slope(betas, deltas)
        slope_loop = loglog_slope(betas, loops)
        ok = abs(slope_delta - 1.0) <= 0.3 and abs(slope_loop - 4.0) <= 0.3
        return ok, f"axial difference slope {slope_delta:.3f} (expect 1), loop slope {slope_loop:.3f} (expect 4)"

    def check_reflection_antisymmetry(self) -> Outcome:
        cfg = DipoleConfig(separation=2.0, beta=0.3)
        paths = [
            axial_path_a(cfg),
            FieldPath((Vec3(3.0, 0.0, -5.0), Vec3(0.5, 0.2, -0.3))),
        ]
        worst = 0.0
        for path in paths:
            a = line_integral_potential(path, cfg, self.tol)
            b = line_integral_potential(path.mirrored(), cfg, self.tol)
            worst = max(worst, abs(a + b))
        return worst <= 10.0 * self.tol, f"max |phi(+z) + phi(-z)| = {worst:.2e}"

    # Action minimizer

    def check_gradient_check(self) -> Outcome:
        rng = self._rng()
        cfg0 = DipoleConfig(separation=2.0, beta=0.0)
        grid = build_grid(cfg0, 33, 33, 5.0)
        start = get_problem(grid, cfg0).initial_guess()
        start = start + 1e-3 * rng.normal(size=start.size)
        q_max = float(np.max(get_problem(grid, cfg0).q(get_problem(grid, cfg0).with_boundary(start))))
        betas = (0.0, 0.3, (0.9 / q_max) ** 0.25)

        worst = 0.0
        eps = 1e-4
        for beta in betas:
            cfg = DipoleConfig(separation=2.0, beta=beta)
            problem = get_problem(grid, cfg)
            x = project_feasible(start, problem, margin=0.05)
            g = problem.gradient(x)
            for _ in range(20):
                d = np.zeros_like(x)
                d[problem.free_index] = rng.normal(size=problem.free_index.size)
                d /= np.linalg.norm(d)
                fd = (problem.action_difference(x + eps * d, x) - problem.action_difference(x - eps * d, x)) / (2 * eps)
                exact = float(g @ d)
                worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-3 * float(np.linalg.norm(g))))
        return worst <= 1e-6, f"max relative deviation {worst:.2e} at betas {', '.join(f'{b:.4g}' for b in betas)}"

    def check_maxwell_limit(self) -> Outcome:
        cfg = DipoleConfig(separation=2.0, beta=0.0)
        spacings = []
        errors = []
        for n in (65, 129, 257):
            grid = build_grid(cfg, n, n, 5.0)
            sol = minimize(grid, cfg, tol=1e-10)
            spacings.append(grid.h)
            errors.append(coulomb_reference_error(sol))
        order = observed_order(spacings, errors)
        return order >= 1.5, f"errors {', '.join(f'{e:.3e}' for e in errors)}; order {order:.2f}"

    def check_descent_and_symmetry(self) -> Outcome:
        cfg = DipoleConfig(separation=2.0, beta=0.3)
        grid = build_grid(cfg, 33, 33, 10.0)
        sol = minimize(grid, cfg, tol=1e-9)
        history = np.asarray(sol.report.action_history)
        descent = bool(np.all(np.diff(history) <= 1e-12 * np.abs(history[1:])))
        problem = get_problem(grid, cfg)
        feasible = problem.is_feasible(problem.flat(sol.phi), FEASIBILITY_EPS)
        mirror = bool(np.all(sol.phi[0, :] == 0.0))
        radial, scale = axis_regularity(sol, 0.25 * cfg.separation)
        ok = descent and feasible and mirror and radial <= scale
        return ok, (
            f"descent {descent}, feasible {feasible}, phi(z=0)=0 {mirror}, "
            f"axis difference {radial:.2e} <= {scale:.2e}"
        )

    def check_uniqueness(self) -> Outcome:
        cfg = DipoleConfig(separation=2.0, beta=0.5)
        grid = build_grid(cfg, 65, 65, 10.0)
        first = minimize(grid, cfg, tol=1e-11)
        second = minimize(grid, cfg, tol=1e-11, init=np.zeros(grid.shape))
        gap = float(np.max(np.abs(first.phi - second.phi)))
        return gap <= 1e-9, f"{grid.n_rho}x{grid.n_z} grid: max |phi_1 - phi_2| = {gap:.2e}"

    def check_beta4_departure(self) -> Outcome:
        cfg0 = DipoleConfig(separation=2.0, beta=0.0)
        grid = build_grid(cfg0, 33, 33, 5.0)
        base = minimize(grid, cfg0, tol=1e-11)
        betas = [0.01, 0.02, 0.04]
        deviations = []
        for beta in betas:
            sol = minimize(grid, DipoleConfig(separation=2.0, beta=beta), tol=1e-11)
            deviations.append(float(np.max(np.abs(sol.phi - base.phi))))
        slope = loglog_slope(betas, deviations)
        return abs(slope - 4.0) <= 0.3, (
            f"{grid.n_rho}x{grid.n_z} grid: slope {slope:.3f}, deviations {', '.join(f'{d:.2e}' for d in deviations)}"
        )

    # Potential extraction

    def check_potential_properties(self) -> Outcome:
        rs = [0.5, 1.0, 2.0, 4.0]
        path = tabulate(0.0, rs, PotentialMethod.PATH_A)
        path_err = float(np.max(np.abs(path.V + 1.0 / np.asarray(rs))))

        cfg = DipoleConfig(separation=2.0, beta=0.0)
        sol = minimize(build_grid(cfg, 65, 65, 10.0), cfg)
        _, v0 = extract_variational(sol)

        soft = []
        for r in (1.0, 2.0, 4.0):
            cfg = DipoleConfig(separation=r, beta=0.3)
            sol = minimize(build_grid(cfg, 33, 33, 10.0), cfg)
            soft.append(extract_variational(sol))
        table = RadialPotential(r=np.array([s[0] for s in soft]), V=np.array([s[1] for s in soft]), beta=0.3,
                                method=PotentialMethod.VARIATIONAL.value)
        if table.softening_violations:
            logger.info(
                f"V < -1/r observed at r = {table.softening_violations}",
                extra={"component": "verification", "event_type": "softening_violation", "beta": 0.3},
            )
        ok = path_err <= self.tol and abs(v0 + 0.5) <= 0.02 and table.is_attractive and table.is_monotone
        return ok, (
            f"path beta=0 error {path_err:.1e}; variational V_0(2) = {v0:.6f}; "
            f"beta=0.3 on 33x33 attractive {table.is_attractive}, monotone {table.is_monotone}"
        )

    # Schrodinger stage

    def _coulomb_levels(self, ell: int, count: int, mesh: Optional[RadialMesh] = None, scale: Optional[float] = None):
        return solve_radial(
            coulomb_potential_radial, ell, count, mesh or self.mesh,
            self.centrifugal_scale if scale is None else scale,
        )

    def check_hydrogen_baseline(self) -> Outcome:
        worst = 0.0
        for ell in range(3):
            for pair in self._coulomb_levels(ell, 4 - ell):
                exact = -0.5 / pair.n**2
                worst = max(worst, abs(pair.energy - exact) / abs(exact))
        return worst <= LEVEL_TOL, f"max relative error {worst:.2e} for n <= 4, l <= 2"

    def check_centrifugal_guard(self) -> Outcome:
        level = self._coulomb_levels(1, 1)[0].energy
        doubled = self._coulomb_levels(1, 1, scale=2.0 * self.centrifugal_scale)[0].energy
        accurate = abs(level + 0.125) <= LEVEL_TOL * 0.125
        sensitive = abs(doubled - level) > 10.0 * LEVEL_TOL * 0.125
        return accurate and sensitive, f"E(n=2, l=1) = {level:.10f} (expect -0.125); doubled term gives {doubled:.6f}"

    def check_orthonormality(self) -> Outcome:
        worst = 0.0
        for ell in range(3):
            pairs = self._coulomb_levels(ell, 3)
            for i, a in enumerate(pairs):
                for j, b in enumerate(pairs):
                    worst = max(worst, abs(overlap(a, b, self.mesh) - (1.0 if i == j else 0.0)))
        return worst <= 1e-8, f"max |<u_i,u_j> - delta_ij| = {worst:.2e}"

    def check_shift_positivity(self) -> Outcome:
        result = spectrum_shifts(
            born_monopole_potential(0.3), 4, 2, self.mesh, beta=0.3, method="analytic",
            centrifugal_scale=self.centrifugal_scale,
        )
        lowest = min(e.shift for e in result.entries)
        ground = result.level(1, 0).shift
        return lowest >= -1e-8 and ground > 0.0, f"min shift {lowest:.3e}, ground-state shift {ground:.6e}"

    def check_variational_spectrum(self) -> Outcome:
        rs = [0.2, 0.5, 1.0, 2.0, 4.0, 10.0]
        grid = GridSettings(n_rho=65, n_z=65)
        potential = tabulate(0.3, rs, PotentialMethod.VARIATIONAL, grid=grid)
        report_flags(potential)
        result = spectrum_shifts(
            potential, 3, 1, self.mesh, beta=0.3, method=potential.method,
            centrifugal_scale=self.centrifugal_scale,
        )
        ground = result.level(1, 0).shift
        lowest = min(e.shift for e in result.entries)
        if ground <= 0.0:
            logger.warning(
                f"beta=0.3 variational ground-state shift is not positive ({ground:.6e})",
                extra={"component": "verification", "event_type": "negative_shift", "beta": 0.3},
            )
        violations = ", ".join(f"{x:g}" for x in potential.softening_violations) or "none"
        finite = all(math.isfinite(e.shift) for e in result.entries)
        return finite, (
            f"{grid.n_rho}x{grid.n_z} grid: ground-state shift {ground:+.6e} "
            f"({'raised' if ground > 0 else 'lowered'}), min shift {lowest:.3e}, V < -1/r at r = {violations}"
        )

    def check_mesh_refinement(self) -> Outcome:
        spacings = []
        errors = []
        energies = []
        for points in (1000, 2000, 4000):
            mesh = self.mesh.model_copy(update={"points": points})
            energy = self._coulomb_levels(0, 1, mesh)[0].energy
            spacings.append(mesh.h)
            energies.append(energy)
            errors.append(abs(energy + 0.5))
        order = observed_order(spacings, errors)
        from_above = bool(np.all(np.diff(energies) <= 0.0))
        if not from_above:
            logger.info(
                "Ground-state energy does not decrease monotonically under refinement",
                extra={"component": "verification", "event_type": "refinement_observation"},
            )
        return order >= 1.5, f"order {order:.2f}; monotone from above: {from_above}"

    # Front end

    def check_config_totality(self) -> Outcome:
        cases: List[Tuple[Dict, str]] = [
            ({"grid": {"n_rho": "many"}}, "grid.n_rho"),
            ({"sweep": {"betas": []}}, "sweep.betas"),
            ({"radial": {"bogus": 1}}, "radial.bogus"),
            ({"sweep": {"separations": [2.0, 1.0]}}, "sweep.separations"),
        ]
        missed = []
        for overrides, key in cases:
            try:
                load_config(overrides=overrides)
                missed.append(key)
            except ConfigurationError as e:
                if key not in e.message:
                    missed.append(key)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.yaml"
            path.write_text(yaml.safe_dump({"plotting": {"dpi": 300}}), encoding="utf-8")
            try:
                load_config(path)
                missed.append("plotting")
            except ConfigurationError as e:
                if "plotting" not in e.message:
                    missed.append("plotting")
        return not missed, "all malformed inputs named" if not missed else f"not diagnosed: {', '.join(missed)}"

    def check_csv_determinism(self) -> Outcome:
        def render() -> str:
            table = write_potential_csv(tabulate(0.1, [1.0, 2.0, 4.0], PotentialMethod.PATH_A), None)
            audit = write_audit_csv([audit_point(SweepPoint(0.1, r)) for r in (1.0, 2.0)], None)
            return table + audit

        first, second = render(), render()
        return first == second, "identical output" if first == second else "outputs differ between runs"

    def check_solution_round_trip(self) -> Outcome:
        cfg = DipoleConfig(separation=2.0, beta=0.1)
        sol = minimize(build_grid(cfg, 17, 17, 5.0), cfg)
        with tempfile.TemporaryDirectory() as tmp:
            path = save_solution(sol, Path(tmp) / "solution.txt")
            loaded = load_solution(path)
            identical = loaded.phi.tobytes() == sol.phi.tobytes() and loaded.grid == sol.grid
            again = save_solution(loaded, Path(tmp) / "again.txt")
            same_text = path.read_bytes() == again.read_bytes()
        return identical and same_text, f"bit-exact values {identical}, identical rewrite {same_text}"

    def check_solution_file(self, path: Path) -> Outcome:
        loaded = load_solution(path, tol=self.solution_tol)
        if not loaded.report.converged:
            return False, (
                f"{path}: stored field is not a minimizer "
                f"(grad_norm={loaded.report.grad_norm:.3e} > tol={self.solution_tol:g})"
            )
        with tempfile.TemporaryDirectory() as tmp:
            again = save_solution(loaded, Path(tmp) / path.name)
            same = again.read_bytes() == path.read_bytes()
        return same, f"{path}: {'round-trips bit-exactly' if same else 'rewrite differs from file'}"
