"""
Axisymmetric minimization of the rescaled Born-Infeld action.

The rescaled action (1 - sqrt(1 - beta^4 |grad phi|^2)) / beta^4 minus the
point-source term is discretized on the quarter-plane grid with half-cells
and minimized by an L-BFGS iteration whose seed inverse Hessian is a sparse
LU factorization of the exact Hessian. Every accepted iterate keeps
beta^4 q <= 1 - FEASIBILITY_EPS on all half-cells.
"""

import logging
import math
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy import sparse
from scipy.sparse.linalg import splu

from borninfeld.exceptions import ConfigurationError, DomainError, InvalidInputError, NonConvergenceError
from borninfeld.fields.bi_fields import DipoleConfig, born_pair_potential, coulomb_potential, exact_born_potential
from borninfeld.metrics.solver_metrics import get_solver_metrics
from borninfeld.solvers.axisym_grid import AxisymGrid

logger = logging.getLogger(__name__)

FEASIBILITY_EPS = 1e-12
INIT_MARGIN = 1e-3

# Armijo sufficient-decrease constant
_ARMIJO_C1 = 1e-4
_MAX_HALVINGS = 60
# Relative size of action differences lost to summation roundoff
_ROUNDOFF = 1e-13

# Weights of g_z^2 and the two radial differences in a half-cell
_COEFFS = (1.0, 0.5, 0.5)


class Parity(str, Enum):
    """Mirror symmetry of the potential across z = 0."""

    ODD = "odd"  # opposite charges at +-r/2, phi = 0 on z = 0
    EVEN = "even"  # single charge at the origin, z = 0 row free


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of one minimization."""

    iterations: int
    grad_norm: float
    action: float
    el_residual: float
    wall_time: float
    converged: bool
    action_history: Tuple[float, ...] = ()
    grid_snap: float = 0.0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "action": self.action,
            "el_residual": self.el_residual,
            "wall_time": self.wall_time,
            "converged": self.converged,
            "grid_snap": self.grid_snap,
        }


@dataclass(frozen=True, eq=False)
class PotentialSolution:
    """Minimizer on the grid; phi is read-only with shape (n_z, n_rho)."""

    grid: AxisymGrid
    phi: np.ndarray
    cfg: DipoleConfig
    report: ConvergenceReport
    parity: Parity = Parity.ODD

    def __post_init__(self) -> None:
        arr = np.array(self.phi, dtype=float).reshape(self.grid.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "phi", arr)

    @property
    def source_value(self) -> float:
        """phi at the charge node (proton for odd parity, origin for even)."""
        row = self.grid.charge_row if self.parity == Parity.ODD else 0
        return float(self.phi[row, 0])


class ActionProblem:
    """
    Discretized action on one grid for one beta and parity.

    Each grid cell is split at its radial midline. A half-cell carries
    q = g_z^2 + (g_rho_bottom^2 + g_rho_top^2) / 2 with g_z taken along its own
    vertical edge, and weight 2 * 2 pi * rho_bar * (h_rho / 2) * h_z for the
    mirror-doubled volume. Immutable once built.
    """

    def __init__(self, grid: AxisymGrid, cfg: DipoleConfig, parity: Parity = Parity.ODD):
        """
        Initialize problem.

        Args:
            grid: Node lattice
            cfg: Charge configuration (only beta is used for even parity)
            parity: Mirror symmetry

        Raises:
            ConfigurationError: If the grid does not place a node at the proton
        """
        self.grid = grid
        self.cfg = cfg
        self.parity = Parity(parity)
        self.beta = cfg.beta
        self.beta4 = cfg.beta**4

        if self.parity == Parity.ODD and not math.isclose(grid.charge_z, 0.5 * cfg.separation, rel_tol=1e-12):
            raise ConfigurationError(
                "grid has no node at the proton location",
                key="grid",
                charge_z=grid.charge_z,
                separation=cfg.separation,
            )

        self.operators, self.weights = self._build_operators()
        self.source_index, self.source_strength = self._source()
        self.free_mask, self.boundary = self._constraints()
        self.free_index = np.flatnonzero(self.free_mask)
        self.free_operators = [op[:, self.free_index].tocsr() for op in self.operators]

    def _build_operators(self) -> Tuple[List[sparse.csr_matrix], np.ndarray]:
        g = self.grid
        nr, nz = g.n_rho, g.n_z
        jj, ii = np.meshgrid(np.arange(nz - 1), np.arange(nr - 1), indexing="ij")
        jj, ii = jj.ravel(), ii.ravel()
        cells = jj.size

        def node(j: np.ndarray, i: np.ndarray) -> np.ndarray:
            return j * nr + i

        rows_z, cols_z, vals_z = [], [], []
        rows_b, cols_b, vals_b = [], [], []
        rows_t, cols_t, vals_t = [], [], []
        weights = []
        for side in (0, 1):
            rows = side * cells + np.arange(cells)
            rows_z += [rows, rows]
            cols_z += [node(jj + 1, ii + side), node(jj, ii + side)]
            vals_z += [np.full(cells, 1.0 / g.h_z), np.full(cells, -1.0 / g.h_z)]
            rows_b += [rows, rows]
            cols_b += [node(jj, ii + 1), node(jj, ii)]
            vals_b += [np.full(cells, 1.0 / g.h_rho), np.full(cells, -1.0 / g.h_rho)]
            rows_t += [rows, rows]
            cols_t += [node(jj + 1, ii + 1), node(jj + 1, ii)]
            vals_t += [np.full(cells, 1.0 / g.h_rho), np.full(cells, -1.0 / g.h_rho)]
            rho_bar = ii * g.h_rho + (1 + 2 * side) * g.h_rho / 4.0
            weights.append(2.0 * 2.0 * math.pi * rho_bar * (g.h_rho / 2.0) * g.h_z)

        shape = (2 * cells, g.size)
        operators = [
            sparse.coo_matrix((np.concatenate(v), (np.concatenate(r), np.concatenate(c))), shape=shape).tocsr()
            for r, c, v in ((rows_z, cols_z, vals_z), (rows_b, cols_b, vals_b), (rows_t, cols_t, vals_t))
        ]
        return operators, np.concatenate(weights)

    def _source(self) -> Tuple[int, float]:
        if self.parity == Parity.ODD:
            # proton plus its mirrored electron
            return self.grid.charge_row * self.grid.n_rho, 8.0 * math.pi
        return 0, 4.0 * math.pi

    def _constraints(self) -> Tuple[np.ndarray, np.ndarray]:
        g = self.grid
        free = np.ones(g.shape, dtype=bool)
        free[:, -1] = False
        free[-1, :] = False
        if self.parity == Parity.ODD:
            free[0, :] = False

        boundary = np.zeros(g.shape)
        pts = g.points()
        outer = np.zeros(g.shape, dtype=bool)
        outer[:, -1] = True
        outer[-1, :] = True
        if self.parity == Parity.ODD:
            boundary[outer] = born_pair_potential(pts[outer], self.cfg)
            boundary[0, :] = 0.0
        else:
            boundary[outer] = exact_born_potential(np.linalg.norm(pts[outer], axis=-1), self.beta)
        return free.ravel(), boundary.ravel()

    @property
    def half_cells(self) -> int:
        return self.weights.size

    def flat(self, phi: np.ndarray) -> np.ndarray:
        """Validate a grid array and return it flattened."""
        arr = np.asarray(phi, dtype=float)
        if arr.size != self.grid.size:
            raise InvalidInputError(
                "potential array does not match the grid", size=int(arr.size), expected=self.grid.size
            )
        arr = arr.reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("potential array must be finite")
        return arr

    def with_boundary(self, phi: np.ndarray) -> np.ndarray:
        """Copy of phi with the Dirichlet values imposed."""
        x = self.flat(phi).copy()
        x[~self.free_mask] = self.boundary[~self.free_mask]
        return x

    def differences(self, x: np.ndarray) -> List[np.ndarray]:
        return [op @ x for op in self.operators]

    def q(self, x: np.ndarray) -> np.ndarray:
        return sum(c * d * d for c, d in zip(_COEFFS, self.differences(x)))

    def is_feasible(self, x: np.ndarray, margin: float = FEASIBILITY_EPS) -> bool:
        if self.beta4 == 0.0:
            return True
        return bool(np.all(self.beta4 * self.q(x) <= 1.0 - margin))

    def _check(self, q: np.ndarray) -> np.ndarray:
        """sqrt(1 - beta^4 q) per half-cell, raising on constraint violation."""
        t = self.beta4 * q
        bad = np.flatnonzero(t > 1.0 - FEASIBILITY_EPS)
        if bad.size:
            cells = (self.grid.n_z - 1) * (self.grid.n_rho - 1)
            side, cell = divmod(int(bad[0]), cells)
            j, i = divmod(cell, self.grid.n_rho - 1)
            raise DomainError(
                f"Born constraint violated on cell (j={j}, i={i}, {'right' if side else 'left'} half)",
                cell=(j, i),
                half="right" if side else "left",
                violations=int(bad.size),
                beta4_q=float(t[bad[0]]),
            )
        return np.sqrt(1.0 - t)

    def action(self, x: np.ndarray) -> float:
        q = self.q(x)
        s = self._check(q)
        return float(np.sum(self.weights * q / (1.0 + s)) - self.source_strength * x[self.source_index])

    def action_difference(self, x_new: np.ndarray, x_old: np.ndarray) -> float:
        """A(x_new) - A(x_old) without cancellation."""
        delta = x_new - x_old
        total = x_new + x_old
        dq = sum(c * (op @ delta) * (op @ total) for c, op in zip(_COEFFS, self.operators))
        s_new = self._check(self.q(x_new))
        s_old = self._check(self.q(x_old))
        return float(
            np.sum(self.weights * dq / (s_new + s_old)) - self.source_strength * delta[self.source_index]
        )

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Full-length gradient, zero on constrained nodes."""
        diffs = self.differences(x)
        q = sum(c * d * d for c, d in zip(_COEFFS, diffs))
        s = self._check(q)
        scale = self.weights / s  # 2 w f'
        g = sum(op.T @ (c * scale * d) for c, op, d in zip(_COEFFS, self.operators, diffs))
        g[self.source_index] -= self.source_strength
        g[~self.free_mask] = 0.0
        return g

    def hessian(self, x: np.ndarray) -> sparse.csr_matrix:
        """Exact Hessian over the free nodes."""
        diffs = self.differences(x)
        q = sum(c * d * d for c, d in zip(_COEFFS, diffs))
        s = self._check(q)
        first = self.weights / s  # 2 w f'
        second = self.weights * self.beta4 / (4.0 * s**3)  # w f''
        hess = sum(op.T @ sparse.diags(c * first) @ op for c, op in zip(_COEFFS, self.free_operators))
        if self.beta4 > 0.0:
            u = sum(sparse.diags(2.0 * c * d) @ op for c, d, op in zip(_COEFFS, diffs, self.free_operators))
            hess = hess + u.T @ sparse.diags(second) @ u
        return hess.tocsr()

    def residual_mask(self) -> np.ndarray:
        """Free nodes farther than two cells from the charge node."""
        row = self.grid.charge_row if self.parity == Parity.ODD else 0
        j, i = np.meshgrid(np.arange(self.grid.n_z), np.arange(self.grid.n_rho), indexing="ij")
        near = (np.abs(j - row) <= 2) & (i <= 2)
        return self.free_mask & ~near.ravel()

    def initial_guess(self) -> np.ndarray:
        """Superposed single-charge Born potentials with distances floored at h/2."""
        pts = self.grid.points().reshape(-1, 3)
        floor = 0.5 * min(self.grid.h_rho, self.grid.h_z)
        if self.parity == Parity.ODD:
            dp = np.maximum(np.linalg.norm(pts - np.asarray(self.cfg.proton), axis=-1), floor)
            de = np.maximum(np.linalg.norm(pts - np.asarray(self.cfg.electron), axis=-1), floor)
            x = np.asarray(exact_born_potential(dp, self.beta)) - np.asarray(exact_born_potential(de, self.beta))
        else:
            d = np.maximum(np.linalg.norm(pts, axis=-1), floor)
            x = np.asarray(exact_born_potential(d, self.beta), dtype=float)
        return self.with_boundary(x)


@cached(cache=LRUCache(maxsize=16), lock=threading.Lock())
def get_problem(grid: AxisymGrid, cfg: DipoleConfig, parity: Parity = Parity.ODD) -> ActionProblem:
    """Shared ActionProblem for a grid, configuration and parity."""
    return ActionProblem(grid, cfg, Parity(parity))


def scaled_action(phi: np.ndarray, grid: AxisymGrid, cfg: DipoleConfig, parity: Parity = Parity.ODD) -> float:
    """
    Rescaled action A / beta^4 with the Maxwell limit at beta = 0.

    Args:
        phi: Node values, shape (n_z, n_rho)
        grid: Node lattice
        cfg: Charge configuration
        parity: Mirror symmetry

    Returns:
        Action value

    Raises:
        DomainError: Identifying the first half-cell with beta^4 q > 1 - eps
    """
    problem = get_problem(grid, cfg, parity)
    return problem.action(problem.flat(phi))


def action_difference(
    phi_new: np.ndarray,
    phi_old: np.ndarray,
    grid: AxisymGrid,
    cfg: DipoleConfig,
    parity: Parity = Parity.ODD,
) -> float:
    """Stable scaled_action(phi_new) - scaled_action(phi_old)."""
    problem = get_problem(grid, cfg, parity)
    return problem.action_difference(problem.flat(phi_new), problem.flat(phi_old))


def action_gradient(phi: np.ndarray, grid: AxisymGrid, cfg: DipoleConfig, parity: Parity = Parity.ODD) -> np.ndarray:
    """
    Gradient of scaled_action with respect to node values.

    Args:
        phi: Node values, shape (n_z, n_rho)
        grid: Node lattice
        cfg: Charge configuration
        parity: Mirror symmetry

    Returns:
        Array of shape (n_z, n_rho), zero on Dirichlet nodes
    """
    problem = get_problem(grid, cfg, parity)
    return problem.gradient(problem.flat(phi)).reshape(grid.shape)


def action_hessian(
    phi: np.ndarray, grid: AxisymGrid, cfg: DipoleConfig, parity: Parity = Parity.ODD
) -> sparse.csr_matrix:
    """Sparse exact Hessian of scaled_action over the free nodes (row-major order)."""
    problem = get_problem(grid, cfg, parity)
    return problem.hessian(problem.flat(phi))


def project_feasible(phi: np.ndarray, problem: ActionProblem, margin: float = INIT_MARGIN) -> np.ndarray:
    """
    Blend phi toward the boundary-only field until every half-cell is feasible.

    Args:
        phi: Node values (Dirichlet values are imposed first)
        problem: Discretized action
        margin: Required slack, beta^4 q <= 1 - margin

    Returns:
        Feasible flattened node values

    Raises:
        ConfigurationError: If the boundary data alone is infeasible
    """
    x = problem.with_boundary(phi)
    if problem.is_feasible(x, margin):
        return x

    base = problem.with_boundary(np.zeros(problem.grid.size))
    if not problem.is_feasible(base, margin):
        raise ConfigurationError(
            "boundary data violates the Born constraint on this grid; refine the grid or enlarge the domain",
            key="grid",
            beta=problem.beta,
        )

    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if problem.is_feasible(base + mid * (x - base), margin):
            lo = mid
        else:
            hi = mid
    logger.debug(f"Feasibility projection blended the initial field with weight {lo:.6f}")
    return base + lo * (x - base)


class _LBFGS:
    """Two-loop recursion with a sparse-LU seed inverse Hessian."""

    def __init__(self, history: int):
        self.history = history
        self.pairs: List[Tuple[np.ndarray, np.ndarray, float]] = []
        self.solve: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def reset(self) -> None:
        self.pairs.clear()

    def update(self, s: np.ndarray, y: np.ndarray) -> None:
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            self.pairs.append((s, y, 1.0 / sy))
            if len(self.pairs) > self.history:
                self.pairs.pop(0)

    def direction(self, g: np.ndarray) -> np.ndarray:
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        r = self.solve(q) if self.solve is not None else q
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * float(y @ r)
            r += s * (a - b)
        return -r


def minimize(
    grid: AxisymGrid,
    cfg: DipoleConfig,
    tol: float = 1e-8,
    init: Optional[np.ndarray] = None,
    *,
    parity: Parity = Parity.ODD,
    max_iter: int = 100_000,
    history: int = 8,
    hessian_refresh: int = 5,
    progress_every: int = 50,
) -> PotentialSolution:
    """
    Minimize the scaled action.

    Args:
        grid: Node lattice
        cfg: Charge configuration
        tol: Euclidean norm of the free-node gradient to reach
        init: Optional starting field (Dirichlet values are imposed, then
            the field is projected into the feasible set)
        parity: Mirror symmetry
        max_iter: Iteration budget
        history: L-BFGS memory length
        hessian_refresh: Iterations between Hessian refactorizations
        progress_every: Progress log cadence in iterations

    Returns:
        Converged PotentialSolution

    Raises:
        NonConvergenceError: Carrying the partial report when the budget runs out
        ConfigurationError: If the boundary data itself is infeasible
    """
    if not tol > 0:
        raise InvalidInputError("tol must be > 0", tol=tol)

    started = time.perf_counter()
    problem = get_problem(grid, cfg, parity)
    x = project_feasible(problem.initial_guess() if init is None else init, problem)
    free = problem.free_index
    metrics = get_solver_metrics()
    context = {"component": "action_minimizer", "beta": cfg.beta, "separation": cfg.separation}

    action = problem.action(x)
    history_values = [action]
    qn = _LBFGS(history)
    g = problem.gradient(x)[free]
    gnorm = float(np.linalg.norm(g))
    since_refresh = hessian_refresh
    iterations = 0
    converged = gnorm <= tol

    while not converged and iterations < max_iter:
        if since_refresh >= hessian_refresh:
            factor = splu(problem.hessian(x).tocsc())
            qn.solve = factor.solve
            since_refresh = 0

        d = qn.direction(g)
        slope = float(g @ d)
        if not slope < 0:
            qn.reset()
            d = -qn.solve(g)
            slope = float(g @ d)

        step = _line_search(problem, x, free, d, slope)
        if step is None:
            if qn.pairs or since_refresh > 0:
                qn.reset()
                since_refresh = hessian_refresh
                continue
            # Armijo is lost in roundoff; fall back to the Newton step judged by the gradient
            step = _newton_step(problem, x, free, d, gnorm)
            if step is None:
                break
            logger.debug(
                f"iteration {iterations}: Newton step accepted on gradient decrease",
                extra={**context, "event_type": "newton_step", "iteration": iterations, "grad_norm": gnorm},
            )

        alpha, x_new, delta = step
        g_new = problem.gradient(x_new)[free]
        qn.update(alpha * d, g_new - g)
        x, g = x_new, g_new
        action += delta
        history_values.append(action)
        gnorm = float(np.linalg.norm(g))
        iterations += 1
        since_refresh += 1
        converged = gnorm <= tol

        if iterations % progress_every == 0:
            logger.info(
                f"iteration {iterations}: grad_norm={gnorm:.3e} action={action:.12g}",
                extra={**context, "event_type": "minimize_progress", "iteration": iterations,
                       "grad_norm": gnorm, "action": action},
            )

    elapsed = time.perf_counter() - started
    residual = float(np.linalg.norm(problem.gradient(x)[problem.residual_mask()]))
    report = ConvergenceReport(
        iterations=iterations,
        grad_norm=gnorm,
        action=problem.action(x),
        el_residual=residual,
        wall_time=elapsed,
        converged=converged,
        action_history=tuple(history_values),
        grid_snap=grid.z_max,
    )
    metrics.record_solve(problem.parity.value, converged, iterations, elapsed, gnorm)

    if not converged:
        logger.warning(
            f"Minimization stopped after {iterations} iterations with grad_norm={gnorm:.3e}",
            extra={**context, "event_type": "minimize_failed", "iteration": iterations, "grad_norm": gnorm},
        )
        raise NonConvergenceError(
            f"minimization did not reach tol={tol:g} (grad_norm={gnorm:.3e} after {iterations} iterations)",
            report=report,
            beta=cfg.beta,
            separation=cfg.separation,
        )

    logger.info(
        f"Minimization converged in {iterations} iterations ({elapsed:.2f}s)",
        extra={**context, "event_type": "minimize_done", "iteration": iterations, "grad_norm": gnorm,
               "action": report.action},
    )
    return PotentialSolution(grid=grid, phi=x.reshape(grid.shape), cfg=cfg, report=report, parity=problem.parity)


def _line_search(
    problem: ActionProblem, x: np.ndarray, free: np.ndarray, d: np.ndarray, slope: float
) -> Optional[Tuple[float, np.ndarray, float]]:
    """Halve until feasible, then backtrack to Armijo. Returns (alpha, x_new, dA) or None."""
    step = np.zeros_like(x)
    step[free] = d
    alpha = 1.0
    for _ in range(_MAX_HALVINGS):
        trial = x + alpha * step
        if problem.is_feasible(trial):
            delta = problem.action_difference(trial, x)
            if delta <= _ARMIJO_C1 * alpha * slope:
                return alpha, trial, delta
        alpha *= 0.5
    return None


def _newton_step(
    problem: ActionProblem, x: np.ndarray, free: np.ndarray, d: np.ndarray, gnorm: float
) -> Optional[Tuple[float, np.ndarray, float]]:
    """
    Halve until feasible with a smaller free-node gradient and no action
    increase beyond roundoff. Returns (alpha, x_new, dA) or None.
    """
    step = np.zeros_like(x)
    step[free] = d
    noise = _ROUNDOFF * (abs(problem.action(x)) + 1.0)
    alpha = 1.0
    for _ in range(_MAX_HALVINGS):
        trial = x + alpha * step
        if problem.is_feasible(trial):
            delta = problem.action_difference(trial, x)
            if delta <= noise and float(np.linalg.norm(problem.gradient(trial)[free])) < gnorm:
                # increases inside roundoff count as no change
                return alpha, trial, min(delta, 0.0)
        alpha *= 0.5
    return None


def el_residual(sol: PotentialSolution) -> float:
    """
    Discrete Euler-Lagrange residual away from the charge.

    Euclidean norm of the volume-integrated divergence of
    D_h = grad_h phi / sqrt(1 - beta^4 |grad_h phi|^2) on free nodes outside
    a two-cell neighbourhood of the charge node.

    Args:
        sol: Solution (phi is used as given)

    Returns:
        Residual norm
    """
    problem = get_problem(sol.grid, sol.cfg, sol.parity)
    x = problem.flat(sol.phi)
    return float(np.linalg.norm(problem.gradient(x)[problem.residual_mask()]))


@cached(cache=LRUCache(maxsize=64), lock=threading.Lock())
def self_potential(grid: AxisymGrid, beta: float, tol: float = 1e-8, max_iter: int = 100_000) -> float:
    """
    Value at an isolated charge computed on the spacings of grid.

    Solves the even-parity problem with the charge at the origin node, so the
    local stencil around the charge matches the dipole solve.

    Args:
        grid: Node lattice of the dipole solve
        beta: Born parameter
        tol: Gradient tolerance
        max_iter: Iteration budget

    Returns:
        phi at the charge node
    """
    cfg = DipoleConfig(separation=2.0 * grid.charge_z, beta=beta)
    sol = minimize(grid, cfg, tol=tol, parity=Parity.EVEN, max_iter=max_iter)
    logger.debug(f"Self potential on {grid.describe()}: {sol.source_value:.12g}", extra={"beta": beta})
    return sol.source_value


def coulomb_reference_error(sol: PotentialSolution, exclusion: Optional[float] = None) -> float:
    """
    Relative L2 distance between an odd-parity solution and the Coulomb pair.

    Args:
        sol: Dipole solution
        exclusion: Nodes closer than this to a charge are skipped
            (default max(2h, r/4))

    Returns:
        sqrt(sum (phi - phi_C)^2 / sum phi_C^2) over the retained nodes
    """
    r = sol.cfg.separation
    radius = max(2.0 * sol.grid.h, 0.25 * r) if exclusion is None else exclusion
    pts = sol.grid.points().reshape(-1, 3)
    dp = np.linalg.norm(pts - np.asarray(sol.cfg.proton), axis=-1)
    de = np.linalg.norm(pts - np.asarray(sol.cfg.electron), axis=-1)
    keep = (dp > radius) & (de > radius)
    exact = np.asarray(coulomb_potential(pts[keep], sol.cfg))
    diff = sol.phi.reshape(-1)[keep] - exact
    return float(np.sqrt(np.sum(diff * diff) / np.sum(exact * exact)))
