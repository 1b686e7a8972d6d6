"""
Solution file persistence.

Text format, bit-exact on round trip:

    # borninfeld-solution v1
    # r=<val> beta=<val> n_rho=<int> n_z=<int> rho_max=<val> z_max=<val>
    <node value, z outer and rho inner, one per line>

Floats are written with 17 significant digits.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from borninfeld.exceptions import BornLabError, InvalidInputError, PersistenceError
from borninfeld.fields.bi_fields import DipoleConfig
from borninfeld.solvers.action_minimizer import ConvergenceReport, PotentialSolution, get_problem
from borninfeld.solvers.axisym_grid import AxisymGrid

logger = logging.getLogger(__name__)

MAGIC = "# borninfeld-solution v1"
_HEADER_KEYS = ("r", "beta", "n_rho", "n_z", "rho_max", "z_max")
# Gradient tolerance assumed for loaded fields
DEFAULT_TOL = 1e-8


def _fmt(value: float) -> str:
    return "%.17g" % value


def save_solution(sol: PotentialSolution, path: Union[str, Path]) -> Path:
    """
    Write a converged dipole solution.

    Args:
        sol: Solution to persist
        path: Destination file; parent directories are created

    Returns:
        Path written

    Raises:
        InvalidInputError: If the solution did not converge
        PersistenceError: If the file cannot be written
    """
    if not sol.report.converged:
        raise InvalidInputError("refusing to persist an unconverged solution")

    path = Path(path)
    g = sol.grid
    header = (
        f"# r={_fmt(sol.cfg.separation)} beta={_fmt(sol.cfg.beta)} n_rho={g.n_rho} n_z={g.n_z} "
        f"rho_max={_fmt(g.rho_max)} z_max={_fmt(g.z_max)}"
    )
    body = "\n".join(_fmt(v) for v in sol.phi.reshape(-1))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(f"{MAGIC}\n{header}\n{body}\n", encoding="ascii")
    except OSError as e:
        raise PersistenceError(f"cannot write solution file {path}: {e}", path=path) from e

    logger.info(f"Saved solution to {path}", extra={"beta": sol.cfg.beta, "separation": sol.cfg.separation})
    return path


def _parse_header(line: str, path: Path) -> Dict[str, str]:
    if not line.startswith("# "):
        raise PersistenceError(f"{path}: malformed parameter header", path=path)
    fields: Dict[str, str] = {}
    for token in line[2:].split():
        key, sep, value = token.partition("=")
        if not sep or key not in _HEADER_KEYS or key in fields:
            raise PersistenceError(f"{path}: unexpected header field {token!r}", path=path)
        fields[key] = value
    missing = [k for k in _HEADER_KEYS if k not in fields]
    if missing:
        raise PersistenceError(f"{path}: header is missing {', '.join(missing)}", path=path)
    return fields


def load_solution(path: Union[str, Path], tol: float = DEFAULT_TOL) -> PotentialSolution:
    """
    Read a solution file.

    The convergence report is rebuilt from the stored field: gradient norm,
    action and residual are recomputed on the restored grid, and the field
    counts as converged only while its gradient norm stays within tol.

    Args:
        path: Solution file
        tol: Gradient tolerance the field was solved to

    Returns:
        PotentialSolution with bit-identical node values

    Raises:
        PersistenceError: Naming the file for unreadable or corrupt content
    """
    path = Path(path)
    try:
        lines: List[str] = path.read_text(encoding="ascii").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise PersistenceError(f"cannot read solution file {path}: {e}", path=path) from e

    if len(lines) < 2 or lines[0].strip() != MAGIC:
        raise PersistenceError(f"{path}: not a borninfeld solution file", path=path)
    fields = _parse_header(lines[1].strip(), path)

    try:
        r = float(fields["r"])
        beta = float(fields["beta"])
        n_rho = int(fields["n_rho"])
        n_z = int(fields["n_z"])
        rho_max = float(fields["rho_max"])
        z_max = float(fields["z_max"])
        values = np.array([float(v) for v in lines[2:] if v.strip()], dtype=float)
    except ValueError as e:
        raise PersistenceError(f"{path}: unparsable value ({e})", path=path) from e

    if values.size != n_rho * n_z:
        raise PersistenceError(
            f"{path}: expected {n_rho * n_z} node values, found {values.size}",
            path=path,
            expected=n_rho * n_z,
            found=int(values.size),
        )
    if not np.all(np.isfinite(values)):
        raise PersistenceError(f"{path}: non-finite node value", path=path)

    try:
        cfg = DipoleConfig(separation=r, beta=beta)
        h_z = z_max / (n_z - 1)
        grid = AxisymGrid(
            n_rho=n_rho,
            n_z=n_z,
            rho_max=rho_max,
            z_max=z_max,
            charge_row=int(round(0.5 * r / h_z)),
            requested_z_max=rho_max,
        )
        problem = get_problem(grid, cfg)
        x = values.copy()
        grad_norm = float(np.linalg.norm(problem.gradient(x)[problem.free_index]))
        report = ConvergenceReport(
            iterations=0,
            grad_norm=grad_norm,
            action=problem.action(x),
            el_residual=float(np.linalg.norm(problem.gradient(x)[problem.residual_mask()])),
            wall_time=0.0,
            converged=grad_norm <= tol,
            grid_snap=z_max,
        )
    except (BornLabError, ValueError, ZeroDivisionError) as e:
        raise PersistenceError(f"{path}: inconsistent solution data ({e})", path=path) from e

    if not math.isfinite(report.grad_norm):
        raise PersistenceError(f"{path}: inconsistent solution data", path=path)

    if not report.converged:
        logger.warning(
            f"{path}: stored field is not a minimizer (grad_norm={report.grad_norm:.3e} > tol={tol:g})",
            extra={"beta": beta, "separation": r, "event_type": "solution_unconverged", "grad_norm": report.grad_norm},
        )
    logger.debug(f"Loaded solution from {path}: {grid.describe()}")
    return PotentialSolution(grid=grid, phi=values.reshape(grid.shape), cfg=cfg, report=report)
