"""
Line integrals of the Coulomb-approximation field.

E_approx is split into the two exact single-charge Born fields, which are
gradients and integrate to endpoint differences of exact_born_potential, and
the nonlinear remainder N, which carries all path dependence and is
integrated numerically. N vanishes identically at beta = 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from borninfeld.exceptions import AccuracyError, InvalidInputError, SingularityError
from borninfeld.fields.bi_fields import DipoleConfig, Vec3, born_pair_potential, nonlinear_remainder
from borninfeld.fields.quadrature import integrate_breakpoints
from borninfeld.metrics.solver_metrics import get_solver_metrics

logger = logging.getLogger(__name__)

# Default distance of the "infinite" end of the axial rays
FAR_DISTANCE = 1e6

# Ratio between successive geometric breakpoints around a charge
_BREAK_RATIO = 4.0


@dataclass(frozen=True)
class Path:
    """Polyline through ordered waypoints, optionally closed."""

    waypoints: Tuple[Vec3, ...]
    closed: bool = False

    def __post_init__(self) -> None:
        points = tuple(Vec3.from_array(p) for p in self.waypoints)
        object.__setattr__(self, "waypoints", points)
        if len(points) < 2:
            raise InvalidInputError("a path needs at least two waypoints", count=len(points))
        if self.closed and points[0] != points[-1]:
            raise InvalidInputError("closed path must end at its first waypoint")

    @property
    def start(self) -> Vec3:
        return self.waypoints[0]

    @property
    def end(self) -> Vec3:
        return self.waypoints[-1]

    def segments(self) -> Iterator[Tuple[Vec3, Vec3]]:
        """Yield consecutive (start, end) pairs, skipping repeated points."""
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            if a != b:
                yield a, b

    def mirrored(self) -> "Path":
        """Reflection z -> -z of every waypoint."""
        return Path(tuple(Vec3(p.x, p.y, -p.z) for p in self.waypoints), closed=self.closed)


def axial_path_a(cfg: DipoleConfig, far: float = FAR_DISTANCE) -> Path:
    """
    Path A: along the axis from z = -far up to the electron.

    Stays on the electron side and never meets the proton.
    """
    e = cfg.electron
    return Path((Vec3(0.0, 0.0, e.z - far), e))


def axial_path_b(cfg: DipoleConfig, far: float = FAR_DISTANCE) -> Path:
    """Path B: along the axis from z = +far down through the proton to the electron."""
    p, e = cfg.proton, cfg.electron
    return Path((Vec3(0.0, 0.0, p.z + far), p, e))


def meridian_loop(rho_range: Tuple[float, float], z_range: Tuple[float, float]) -> Path:
    """
    Counter-clockwise rectangle in the x,z half-plane x > 0.

    Args:
        rho_range: (rho_min, rho_max) with rho_min < rho_max
        z_range: (z_min, z_max) with z_min < z_max

    Returns:
        Closed path
    """
    r0, r1 = rho_range
    z0, z1 = z_range
    if not (r0 < r1 and z0 < z1):
        raise InvalidInputError("loop ranges must be increasing", rho_range=list(rho_range), z_range=list(z_range))
    corners = (
        Vec3(r0, 0.0, z0),
        Vec3(r1, 0.0, z0),
        Vec3(r1, 0.0, z1),
        Vec3(r0, 0.0, z1),
        Vec3(r0, 0.0, z0),
    )
    return Path(corners, closed=True)


def proton_side_loop(cfg: DipoleConfig) -> Path:
    """Meridian loop beside the proton used by the audit: rho in [r/4, r], z in [0, r]."""
    r = cfg.separation
    return meridian_loop((0.25 * r, r), (0.0, r))


def _closest_approach(a: np.ndarray, u: np.ndarray, length: float, center: np.ndarray) -> Tuple[float, float]:
    t = float(np.clip(np.dot(center - a, u), 0.0, length))
    return t, float(np.linalg.norm(a + t * u - center))


def _breakpoints(a: np.ndarray, u: np.ndarray, length: float, cfg: DipoleConfig) -> List[float]:
    """Arc-length breakpoints refined geometrically toward each charge."""
    points = {0.0, length}
    for center, _ in cfg.charges:
        c = np.asarray(center)
        t0, dmin = _closest_approach(a, u, length, c)
        points.add(t0)
        scale = min(cfg.beta, cfg.separation, dmin if dmin > 0 else math.inf) / 4.0
        scale = max(scale, 1e-9 * cfg.separation)
        step = scale
        while step < length:
            for t in (t0 - step, t0 + step):
                if 0.0 < t < length:
                    points.add(t)
            step *= _BREAK_RATIO

    ordered = sorted(points)
    merged = [ordered[0]]
    for t in ordered[1:]:
        if t - merged[-1] > 1e-12 * length:
            merged.append(t)
    merged[-1] = length
    return merged


def _remainder_integral(path: Path, cfg: DipoleConfig, tol: float, limit: int) -> Tuple[float, float, int]:
    """Integral of N . dl along the path as (value, error, pieces)."""
    if cfg.beta == 0.0:
        return 0.0, 0.0, 0

    segments = list(path.segments())
    plans = []
    for start, end in segments:
        a = np.asarray(start, dtype=float)
        d = np.asarray(end, dtype=float) - a
        length = float(np.linalg.norm(d))
        u = d / length
        plans.append((a, u, _breakpoints(a, u, length, cfg)))

    pieces = sum(len(bp) - 1 for _, _, bp in plans)
    metrics = get_solver_metrics()
    total = 0.0
    error = 0.0
    try:
        for a, u, bp in plans:

            def integrand(t: float, a: np.ndarray = a, u: np.ndarray = u) -> float:
                return float(np.dot(nonlinear_remainder(a + t * u, cfg), u))

            share = tol * (len(bp) - 1) / pieces
            value, err = integrate_breakpoints(integrand, bp, tol=share, limit=limit)
            total += value
            error += err
    except AccuracyError:
        metrics.record_quadrature(pieces, failed=True)
        raise

    metrics.record_quadrature(pieces)
    return total, error, pieces


def line_integral_potential(path: Path, cfg: DipoleConfig, tol: float = 1e-10, limit: int = 400) -> float:
    """
    Potential at the end of an open path from integrating -E_approx along it.

    The potential at the start is anchored to the superposed single-charge
    Born value there, which vanishes as the start recedes to infinity. The
    end may sit on a charge for beta > 0, where the integrand is bounded.

    Args:
        path: Open path
        cfg: Charge configuration
        tol: Absolute error budget of the quadrature
        limit: Subinterval budget per piece

    Returns:
        phi_approx at the end point

    Raises:
        SingularityError: If beta = 0 and an end point sits on a charge
        AccuracyError: If the quadrature misses its budget
    """
    if path.closed:
        raise InvalidInputError("line_integral_potential needs an open path")

    anchor = born_pair_potential(path.end, cfg)
    remainder, error, pieces = _remainder_integral(path, cfg, tol, limit)
    logger.debug(
        f"Path potential {anchor - remainder:.12g} over {pieces} pieces (error {error:.2e})",
        extra={"beta": cfg.beta, "separation": cfg.separation},
    )
    return float(anchor - remainder)


def circulation(loop: Path, cfg: DipoleConfig, tol: float = 1e-10, limit: int = 400) -> float:
    """
    Closed-loop integral of E_approx . dl.

    Args:
        loop: Closed path avoiding the charges
        cfg: Charge configuration
        tol: Absolute error budget of the quadrature
        limit: Subinterval budget per piece

    Returns:
        Signed circulation; exactly 0 for beta = 0

    Raises:
        SingularityError: If the loop touches a charge
        AccuracyError: If the quadrature misses its budget
    """
    if not loop.closed:
        raise InvalidInputError("circulation needs a closed path")

    for start, end in loop.segments():
        a = np.asarray(start, dtype=float)
        d = np.asarray(end, dtype=float) - a
        length = float(np.linalg.norm(d))
        for center, charge in cfg.charges:
            _, dmin = _closest_approach(a, d / length, length, np.asarray(center))
            if dmin == 0.0:
                raise SingularityError("loop passes through a charge", charge=charge)

    value, _, _ = _remainder_integral(loop, cfg, tol, limit)
    return float(value)


def path_potentials(cfg: DipoleConfig, tol: float = 1e-10, far: float = FAR_DISTANCE) -> Tuple[float, float]:
    """phi_approx at the electron along paths A and B."""
    return (
        line_integral_potential(axial_path_a(cfg, far), cfg, tol),
        line_integral_potential(axial_path_b(cfg, far), cfg, tol),
    )


def random_loop(
    rng: np.random.Generator, cfg: DipoleConfig, vertices: int = 4, max_attempts: int = 1000
) -> Path:
    """
    Random closed polygon that avoids the charges.

    Args:
        rng: Random generator
        cfg: Charge configuration
        vertices: Number of distinct corners
        max_attempts: Candidate polygons drawn before giving up

    Returns:
        Closed path

    Raises:
        InvalidInputError: If no candidate clears both charges
    """
    r = cfg.separation
    for _ in range(max_attempts):
        corners = rng.uniform(-2.0 * r, 2.0 * r, size=(vertices, 3))
        points: Sequence[Vec3] = [Vec3.from_array(c) for c in corners]
        loop = Path(tuple(points) + (points[0],), closed=True)
        clear = True
        for start, end in loop.segments():
            a = np.asarray(start)
            d = np.asarray(end) - a
            length = float(np.linalg.norm(d))
            for center, _ in cfg.charges:
                _, dmin = _closest_approach(a, d / length, length, np.asarray(center))
                if dmin < 0.05 * r:
                    clear = False
        if clear:
            return loop
    raise InvalidInputError(
        f"no random loop cleared the charges in {max_attempts} attempts",
        max_attempts=max_attempts,
        vertices=vertices,
    )


def remainder_integral(path: Path, cfg: DipoleConfig, tol: float = 1e-10, limit: int = 400) -> float:
    """
    Integral of the nonlinear remainder N . dl along a path.

    This is the whole path-dependent part of any line integral of E_approx.
    """
    value, _, _ = _remainder_integral(path, cfg, tol, limit)
    return float(value)
