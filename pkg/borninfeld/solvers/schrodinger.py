"""
Radial Schrodinger eigensolver on a logarithmic mesh.

Solves -1/2 u'' + [l(l+1)/(2 r^2) + V(r)] u = E u in hartree atomic units.
With r = r_min * exp(x) and u = sqrt(r) * y, the scaled unknown z = r * y
turns the second-order difference operator into a symmetric tridiagonal
matrix with

    C_ii     = (1/h^2 + 1/8) / r_i^2 + l(l+1) / (2 r_i^2) + V(r_i)
    C_i,i+1  = -1 / (2 h^2 r_i r_{i+1})

and h * sum(z^2) approximates the integral of u^2 dr.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.linalg import eigh_tridiagonal

from borninfeld.exceptions import InvalidInputError, PartialSpectrumError
from borninfeld.fields.bi_fields import exact_born_potential
from borninfeld.metrics.solver_metrics import get_solver_metrics

logger = logging.getLogger(__name__)

PotentialFunction = Callable[[np.ndarray], np.ndarray]

# Absolute bisection tolerance; the LAPACK default scales with the matrix norm
EIGEN_TOL = 1e-14


class RadialMesh(BaseModel):
    """Logarithmic radial mesh r_i = r_min * exp(i h), i = 0 .. points - 1."""

    r_min: float = Field(default=1e-4, gt=0)
    r_max: float = Field(default=80.0, gt=0)
    points: int = Field(default=4000, ge=16)
    inner_boundary: str = Field(default="regular")

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @field_validator("inner_boundary")
    @classmethod
    def _boundary_known(cls, v: str) -> str:
        if v not in ("regular", "dirichlet"):
            raise ValueError("inner_boundary must be 'regular' or 'dirichlet'")
        return v

    @model_validator(mode="after")
    def _range_valid(self) -> "RadialMesh":
        if self.r_max <= self.r_min:
            raise ValueError("r_max must exceed r_min")
        return self

    @property
    def h(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.points - 1)

    @property
    def r(self) -> np.ndarray:
        return self.r_min * np.exp(self.h * np.arange(self.points))

    def unknowns(self) -> slice:
        """Mesh indices carrying unknowns; u(r_max) = 0 always."""
        start = 0 if self.inner_boundary == "regular" else 1
        return slice(start, self.points - 1)

    def describe(self) -> str:
        return f"log mesh r=[{self.r_min:g}, {self.r_max:g}], {self.points} points, {self.inner_boundary} origin"

    @classmethod
    def from_settings(cls, settings) -> "RadialMesh":
        """Build from a RadialSettings section."""
        return cls(
            r_min=settings.r_min,
            r_max=settings.r_max,
            points=settings.points,
            inner_boundary=settings.inner_boundary,
        )


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """Bound state with u normalized to integral u^2 dr = 1 on the mesh nodes."""

    n: int
    ell: int
    energy: float
    r: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    ell: int
    energy: float
    shift: float


@dataclass(frozen=True)
class SpectrumResult:
    """Levels E_{n,l} of a potential and their shifts from the Coulomb levels on the same mesh."""

    entries: Tuple[SpectrumEntry, ...]
    beta: Optional[float]
    method: str
    mesh: RadialMesh

    def level(self, n: int, ell: int) -> SpectrumEntry:
        for entry in self.entries:
            if entry.n == n and entry.ell == ell:
                return entry
        raise KeyError((n, ell))

    def to_rows(self) -> List[dict]:
        return [
            {"n": e.n, "ell": e.ell, "E": e.energy, "shift": e.shift, "beta": self.beta, "method": self.method}
            for e in self.entries
        ]


def coulomb_potential_radial(r: np.ndarray) -> np.ndarray:
    """Attractive Coulomb potential -1/r."""
    return -1.0 / np.asarray(r, dtype=float)


def born_monopole_potential(beta: float) -> PotentialFunction:
    """
    Softened reference potential -exact_born_potential(r, beta).

    Lies above -1/r everywhere and is finite at the origin.
    """

    def potential(r: np.ndarray) -> np.ndarray:
        return -np.asarray(exact_born_potential(np.asarray(r, dtype=float), beta), dtype=float)

    return potential


def _tridiagonal(
    potential: PotentialFunction, ell: int, mesh: RadialMesh, centrifugal_scale: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = mesh.r[mesh.unknowns()]
    h = mesh.h
    values = np.asarray(potential(r), dtype=float)
    if values.shape != r.shape or not np.all(np.isfinite(values)):
        raise InvalidInputError("potential must return finite values on the mesh")

    diag = (1.0 / h**2 + 0.125) / r**2 + centrifugal_scale * ell * (ell + 1) / (2.0 * r**2) + values
    off = -1.0 / (2.0 * h**2 * r[:-1] * r[1:])
    if mesh.inner_boundary == "regular":
        # ghost node y_{-1} = y_0 exp(-(l + 1/2) h), so u ~ r^(l+1) at the origin
        diag[0] -= math.exp(-(ell + 0.5) * h) / (2.0 * h**2 * r[0] ** 2)
    return diag, off, r


def solve_radial(
    potential: PotentialFunction,
    ell: int,
    count: int,
    mesh: Optional[RadialMesh] = None,
    centrifugal_scale: float = 1.0,
) -> List[Eigenpair]:
    """
    Lowest bound states for one orbital quantum number.

    Args:
        potential: Central potential V(r), vectorized over r (hartree)
        ell: Orbital quantum number, >= 0
        count: Number of states wanted, >= 1
        mesh: Radial mesh (default RadialMesh())
        centrifugal_scale: Multiplier on l(l+1)/(2 r^2)

    Returns:
        count eigenpairs ordered by energy, n = ell + 1, ell + 2, ...

    Raises:
        PartialSpectrumError: If fewer than count states lie below 0
    """
    if ell < 0 or count < 1:
        raise InvalidInputError("ell must be >= 0 and count >= 1", ell=ell, count=count)
    mesh = mesh or RadialMesh()

    diag, off, r = _tridiagonal(potential, ell, mesh, centrifugal_scale)
    if count > diag.size:
        raise InvalidInputError("more states requested than mesh unknowns", count=count)
    energies, vectors = eigh_tridiagonal(
        diag, off, select="i", select_range=(0, count - 1), tol=EIGEN_TOL
    )
    get_solver_metrics().record_eigensolve(ell)

    pairs: List[Eigenpair] = []
    for k, energy in enumerate(energies):
        if not energy < 0.0:
            break
        z = vectors[:, k] / math.sqrt(mesh.h)
        if z[np.argmax(np.abs(z) > 1e-8 * np.max(np.abs(z)))] < 0:
            z = -z
        u = z / np.sqrt(r)
        pairs.append(Eigenpair(n=ell + 1 + k, ell=ell, energy=float(energy), r=r, u=u))

    if len(pairs) < count:
        found = [(p.n, p.ell, p.energy) for p in pairs]
        raise PartialSpectrumError(
            f"found {len(pairs)} bound states for l={ell}, {count} requested",
            found=found,
            ell=ell,
        )

    logger.debug(
        f"l={ell}: lowest {count} levels {', '.join(f'{p.energy:.10f}' for p in pairs)}",
        extra={"component": "schrodinger"},
    )
    return pairs


def overlap(a: Eigenpair, b: Eigenpair, mesh: RadialMesh) -> float:
    """Discrete integral of u_a u_b dr on the log mesh."""
    return float(mesh.h * np.sum(a.u * b.u * a.r))


def spectrum_shifts(
    potential: PotentialFunction,
    n_max: int,
    ell_max: int,
    mesh: Optional[RadialMesh] = None,
    *,
    beta: Optional[float] = None,
    method: str = "analytic",
    centrifugal_scale: float = 1.0,
) -> SpectrumResult:
    """
    Levels up to n_max for every l <= ell_max with shifts from Coulomb.

    The Coulomb reference is solved on the identical mesh so that the
    discretization error cancels in the shift.

    Args:
        potential: Central potential V(r)
        n_max: Highest principal quantum number
        ell_max: Highest orbital quantum number, < n_max
        mesh: Radial mesh
        beta: Born parameter of the potential, for the result record
        method: Potential method tag
        centrifugal_scale: Multiplier on the centrifugal term

    Returns:
        SpectrumResult ordered by l then n
    """
    if ell_max < 0 or ell_max >= n_max:
        raise InvalidInputError("ell_max must satisfy 0 <= ell_max < n_max", n_max=n_max, ell_max=ell_max)
    mesh = mesh or RadialMesh()

    entries: List[SpectrumEntry] = []
    for ell in range(ell_max + 1):
        count = n_max - ell
        levels = solve_radial(potential, ell, count, mesh, centrifugal_scale)
        reference = solve_radial(coulomb_potential_radial, ell, count, mesh, centrifugal_scale)
        for level, ref in zip(levels, reference):
            entries.append(SpectrumEntry(n=level.n, ell=ell, energy=level.energy, shift=level.energy - ref.energy))

    result = SpectrumResult(entries=tuple(entries), beta=beta, method=method, mesh=mesh)
    ground = result.level(1, 0)
    logger.info(
        f"Spectrum computed for {len(entries)} levels; ground-state shift {ground.shift:.6e} hartree",
        extra={"component": "schrodinger", "beta": beta, "method": method},
    )
    return result
