"""
Interaction potential extraction.

Turns a variational dipole solution or the Coulomb-approximation path
integrals into samples (r, V) of the separation-dependent interaction
energy, and tabulates them into a callable RadialPotential.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from borninfeld.config.config_loader import GridSettings, PotentialMethod, QuadratureSettings
from borninfeld.exceptions import BornLabError, ExtractionError, InvalidInputError
from borninfeld.fields.bi_fields import DipoleConfig, exact_born_potential
from borninfeld.fields.paths import axial_path_a, axial_path_b, remainder_integral
from borninfeld.logging.logger import create_run_logger
from borninfeld.solvers.action_minimizer import Parity, PotentialSolution, minimize, self_potential
from borninfeld.solvers.axisym_grid import build_grid

logger = logging.getLogger(__name__)

Sample = Tuple[float, float]

# Slack when flagging V < -1/r
SOFTENING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """
    Tabulated interaction potential V(r) in hartree.

    Between samples V * r is interpolated with a monotone cubic; below the
    first sample V is held constant and beyond the last it continues as -1/r.
    """

    r: np.ndarray
    V: np.ndarray
    beta: float
    method: str
    _interp: Optional[PchipInterpolator] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        r = np.array(self.r, dtype=float)
        v = np.array(self.V, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size == 0:
            raise InvalidInputError("potential samples must be non-empty matching 1-D arrays")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise InvalidInputError("potential samples must be finite")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise InvalidInputError("sample separations must be positive and strictly increasing")
        r.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "method", str(PotentialMethod(self.method).value))
        if r.size >= 2:
            object.__setattr__(self, "_interp", PchipInterpolator(r, v * r, extrapolate=False))

    def __call__(self, r: Union[float, np.ndarray]) -> np.ndarray:
        shape = np.shape(r)
        x = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
        out = np.empty_like(x)
        below = x <= self.r[0]
        above = x >= self.r[-1]
        inside = ~(below | above)
        out[below] = self.V[0]
        out[above] = -1.0 / x[above]
        if self._interp is not None and np.any(inside):
            out[inside] = self._interp(x[inside]) / x[inside]
        return out.reshape(shape)

    @property
    def samples(self) -> List[Sample]:
        return [(float(a), float(b)) for a, b in zip(self.r, self.V)]

    @property
    def softening_violations(self) -> List[float]:
        """Separations where V < -1/r beyond SOFTENING_TOL."""
        return [float(x) for x, v in zip(self.r, self.V) if v < -1.0 / x - SOFTENING_TOL]

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.V) >= 0))

    @property
    def is_attractive(self) -> bool:
        return bool(np.all(self.V < 0))


def extract_variational(
    sol: PotentialSolution, self_value: Optional[float] = None, tol: float = 1e-8
) -> Sample:
    """
    Interaction energy from a converged dipole solution.

    V = -(phi(s_e) - phi_inf) with phi(s_e) = -phi(proton node). phi_inf is
    minus the isolated-charge value computed on the same grid spacings, which
    keeps the self-energy discretization identical on both sides.

    Args:
        sol: Converged odd-parity solution
        self_value: Isolated-charge value to subtract (default: solved on
            the same grid)
        tol: Gradient tolerance for the isolated-charge solve

    Returns:
        (r, V) sample

    Raises:
        InvalidInputError: If the solution is unconverged or not a dipole
    """
    if not sol.report.converged:
        raise InvalidInputError("cannot extract a potential from an unconverged solution")
    if sol.parity != Parity.ODD:
        raise InvalidInputError("extraction needs a dipole (odd-parity) solution")

    if self_value is None:
        self_value = self_potential(sol.grid, sol.cfg.beta, tol)
    return sol.cfg.separation, float(sol.source_value - self_value)


def extract_path(cfg: DipoleConfig, path_choice: Union[str, PotentialMethod], tol: float = 1e-10) -> Sample:
    """
    Interaction energy from the Coulomb-approximation line integral.

    Uses the exact r -> infinity limit of the same estimator, phi_inf =
    -exact_born_potential(0, beta), so V = -exact_born_potential(r, beta)
    plus the path integral of the nonlinear remainder.

    Args:
        cfg: Charge configuration
        path_choice: "A"/"path_A" or "B"/"path_B"
        tol: Quadrature error budget

    Returns:
        (r, V) sample
    """
    choice = str(getattr(path_choice, "value", path_choice)).upper().replace("PATH_", "")
    if choice not in ("A", "B"):
        raise InvalidInputError(f"unknown path choice {path_choice!r}", path_choice=str(path_choice))
    path = axial_path_a(cfg) if choice == "A" else axial_path_b(cfg)
    value = -float(exact_born_potential(cfg.separation, cfg.beta)) + remainder_integral(path, cfg, tol)
    return cfg.separation, value


def sample_potential(
    beta: float,
    r: float,
    method: Union[str, PotentialMethod],
    grid: Optional[GridSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
) -> Tuple[Sample, Optional[PotentialSolution]]:
    """
    One (r, V) sample with the requested estimator.

    Args:
        beta: Born parameter
        r: Separation
        method: variational, path_A or path_B
        grid: Grid and minimizer settings for the variational method
        quadrature: Quadrature settings for the path methods

    Returns:
        Tuple of the sample and the dipole solution (None for path methods)
    """
    method = PotentialMethod(method)
    cfg = DipoleConfig(separation=r, beta=beta)
    if method != PotentialMethod.VARIATIONAL:
        quadrature = quadrature or QuadratureSettings()
        return extract_path(cfg, method, quadrature.tol), None

    grid = grid or GridSettings()
    mesh = build_grid(cfg, grid.n_rho, grid.n_z, grid.extent_factor)
    sol = minimize(
        mesh,
        cfg,
        tol=grid.tol,
        max_iter=grid.max_iter,
        history=grid.history,
        hessian_refresh=grid.hessian_refresh,
        progress_every=grid.progress_every,
    )
    return extract_variational(sol, tol=grid.tol), sol


def tabulate(
    beta: float,
    r_list: Sequence[float],
    method: Union[str, PotentialMethod],
    grid: Optional[GridSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
    workers: int = 1,
) -> RadialPotential:
    """
    Tabulate V at each separation, evaluating samples concurrently.

    Args:
        beta: Born parameter
        r_list: Strictly increasing positive separations
        method: variational, path_A or path_B
        grid: Grid and minimizer settings
        quadrature: Quadrature settings
        workers: Worker pool size

    Returns:
        RadialPotential with one sample per separation, in input order

    Raises:
        ExtractionError: Naming the first separation whose sample failed
    """
    rs = [float(r) for r in r_list]
    if not rs or any(r <= 0 for r in rs) or any(b <= a for a, b in zip(rs, rs[1:])):
        raise InvalidInputError("r_list must be non-empty, positive and strictly increasing")
    method = PotentialMethod(method)
    run_logger = create_run_logger(logger, beta)

    def one(r: float) -> Sample:
        try:
            sample, _ = sample_potential(beta, r, method, grid, quadrature)
        except BornLabError as e:
            raise ExtractionError(f"sample at r={r:g} failed: {e.message}", separation=r, beta=beta) from e
        return sample

    run_logger.info(f"Tabulating {len(rs)} separations with method {method.value}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        samples = list(executor.map(one, rs))

    potential = RadialPotential(
        r=np.array([s[0] for s in samples]),
        V=np.array([s[1] for s in samples]),
        beta=beta,
        method=method.value,
    )
    report_flags(potential)
    return potential


def report_flags(potential: RadialPotential) -> None:
    """Log softening violations and non-monotone tables as warnings."""
    violations = potential.softening_violations
    if violations:
        logger.warning(
            f"V < -1/r at r = {', '.join(f'{x:g}' for x in violations)}",
            extra={"beta": potential.beta, "method": potential.method, "event_type": "softening_violation"},
        )
    if not potential.is_monotone:
        logger.warning(
            "tabulated potential is not monotone in r",
            extra={"beta": potential.beta, "method": potential.method, "event_type": "non_monotone"},
        )
