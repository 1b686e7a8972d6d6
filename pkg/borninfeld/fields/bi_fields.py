"""
Closed-form Born-Infeld field algebra.

Constitutive map between displacement D and field strength E, the exact
single-charge Born potential, the two-charge Coulomb displacement, and the
field obtained by pushing that displacement through the Born constitutive
law (the Coulomb approximation).

Units are Gaussian-style atomic units: unit charges, lengths in Bohr radii,
div D = 4 pi rho, Coulomb potential 1/r. The Born parameter beta is a length;
field strengths saturate at 1/beta**2.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy import special

from borninfeld.exceptions import DomainError, InvalidInputError, SingularityError
from borninfeld.fields.quadrature import integrate_piece

logger = logging.getLogger(__name__)

# Parameter m of the incomplete elliptic integral that represents the Born potential
_ELLIPTIC_M = 0.5

Scalar = Union[float, NDArray[np.float64]]


class Vec3(NamedTuple):
    """Point or vector in Cartesian coordinates (Bohr radii)."""

    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        """Euclidean length."""
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @classmethod
    def from_array(cls, values: ArrayLike) -> "Vec3":
        """Build from any length-3 array-like."""
        arr = _as_vectors(values, "vector")
        if arr.shape != (3,):
            raise InvalidInputError("expected a single 3-vector", shape=list(arr.shape))
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


class DipoleConfig(BaseModel):
    """
    Opposite unit point charges on the z axis.

    The proton (+1) sits at (0, 0, +r/2) and the electron (-1) at
    (0, 0, -r/2), so the x,y plane halves the segment between them.
    """

    separation: float = Field(gt=0, description="Charge separation r (Bohr radii)")
    beta: float = Field(ge=0, description="Born parameter (Bohr radii)")

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @property
    def proton(self) -> Vec3:
        return Vec3(0.0, 0.0, 0.5 * self.separation)

    @property
    def electron(self) -> Vec3:
        return Vec3(0.0, 0.0, -0.5 * self.separation)

    @property
    def charges(self) -> Tuple[Tuple[Vec3, float], Tuple[Vec3, float]]:
        """(location, charge) pairs."""
        return ((self.proton, 1.0), (self.electron, -1.0))

    def with_separation(self, separation: float) -> "DipoleConfig":
        """Copy with another separation."""
        return DipoleConfig(separation=separation, beta=self.beta)


@dataclass(frozen=True)
class FieldSample:
    """Displacement and field strength at one point."""

    point: Vec3
    D: Vec3
    E: Vec3


def _as_vectors(values: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise InvalidInputError(f"{name} must have a trailing dimension of 3", shape=list(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    return arr


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise InvalidInputError("beta must be finite and >= 0", beta=beta)
    return beta


def e_from_d(D: ArrayLike, beta: float) -> NDArray[np.float64]:
    """
    Field strength from displacement, E = D / sqrt(1 + beta^4 |D|^2).

    Args:
        D: Displacement, shape (3,) or (..., 3)
        beta: Born parameter

    Returns:
        E with the shape of D; |E| < 1/beta^2 for beta > 0
    """
    d = _as_vectors(D, "D")
    b4 = _check_beta(beta) ** 4
    sq = np.sum(d * d, axis=-1, keepdims=True)
    return d / np.sqrt(1.0 + b4 * sq)


def d_from_e(E: ArrayLike, beta: float) -> NDArray[np.float64]:
    """
    Displacement from field strength, D = E / sqrt(1 - beta^4 |E|^2).

    The round trip through :func:`e_from_d` loses relative accuracy in
    proportion to 1 + beta^4 |D|^2, the conditioning of the saturated regime.

    Args:
        E: Field strength, shape (3,) or (..., 3)
        beta: Born parameter

    Returns:
        D with the shape of E

    Raises:
        DomainError: If beta^2 |E| >= 1 anywhere
    """
    e = _as_vectors(E, "E")
    b2 = _check_beta(beta) ** 2
    a = b2 * np.sqrt(np.sum(e * e, axis=-1, keepdims=True))
    if np.any(a >= 1.0):
        raise DomainError("field exceeds Born saturation (beta^2 |E| >= 1)", beta=beta, max_ratio=float(np.max(a)))
    return e / np.sqrt((1.0 - a) * (1.0 + a))


def exact_born_potential(s: ArrayLike, beta: float) -> Scalar:
    """
    Potential of an isolated unit Born charge at distance s.

    Evaluates the integral of dt / sqrt(t^4 + beta^4) from s to infinity in
    closed form, F(2 arctan(beta/s) | 1/2) / (2 beta), with F the incomplete
    elliptic integral of the first kind.

    Args:
        s: Distance(s) from the charge, >= 0
        beta: Born parameter, >= 0

    Returns:
        Potential value(s); a float for scalar input

    Raises:
        DomainError: If s = beta = 0 (the Coulomb self-potential diverges)
    """
    beta = _check_beta(beta)
    dist = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(dist)) or np.any(dist < 0):
        raise InvalidInputError("distance must be finite and >= 0")

    if beta == 0.0:
        if np.any(dist == 0.0):
            raise DomainError("Coulomb potential diverges at s = 0 for beta = 0")
        value = 1.0 / dist
    else:
        value = special.ellipkinc(2.0 * np.arctan2(beta, dist), _ELLIPTIC_M) / (2.0 * beta)

    return float(value) if np.ndim(value) == 0 else value


def born_potential_quadrature(s: float, beta: float, tol: float = 1e-12) -> float:
    """
    Adaptive-quadrature oracle for :func:`exact_born_potential`.

    Integrates dt / sqrt(t^4 + beta^4) on [s, inf) after the compactifying
    substitution t = s + u^2 / (1 - u), u in [0, 1).

    Args:
        s: Distance from the charge, >= 0
        beta: Born parameter, >= 0
        tol: Absolute and relative tolerance

    Returns:
        Potential value

    Raises:
        DomainError: If s = beta = 0
        AccuracyError: If the quadrature does not converge
    """
    beta = _check_beta(beta)
    s = float(s)
    if not math.isfinite(s) or s < 0:
        raise InvalidInputError("distance must be finite and >= 0", s=s)
    if beta == 0.0:
        if s == 0.0:
            raise DomainError("Coulomb potential diverges at s = 0 for beta = 0")
        return 1.0 / s

    b4 = beta**4

    def integrand(u: float) -> float:
        w = 1.0 - u
        t = s + u * u / w
        return (2.0 * u - u * u) / (w * w) / math.sqrt(t**4 + b4)

    value, _ = integrate_piece(integrand, 0.0, 1.0, tol=tol, rel_tol=tol, limit=200)
    return value


def coulomb_displacement(s: ArrayLike, cfg: DipoleConfig) -> NDArray[np.float64]:
    """
    Two-charge Coulomb displacement D_C(s) = (s-s_p)/|s-s_p|^3 - (s-s_e)/|s-s_e|^3.

    Args:
        s: Point(s), shape (3,) or (..., 3)
        cfg: Charge configuration

    Returns:
        D_C with the shape of s

    Raises:
        SingularityError: If any point coincides with a charge
    """
    pts = _as_vectors(s, "s")
    total = np.zeros_like(pts)
    for center, charge in cfg.charges:
        rel = pts - np.asarray(center)
        dist = np.sqrt(np.sum(rel * rel, axis=-1, keepdims=True))
        if np.any(dist == 0.0):
            raise SingularityError("Coulomb field evaluated at a charge location", charge=charge)
        total += charge * rel / dist**3
    return total


def coulomb_potential(s: ArrayLike, cfg: DipoleConfig) -> Scalar:
    """
    Analytic Coulomb pair potential 1/|s - s_p| - 1/|s - s_e|.

    Args:
        s: Point(s), shape (3,) or (..., 3)
        cfg: Charge configuration

    Returns:
        Potential value(s)
    """
    pts = _as_vectors(s, "s")
    dp = np.linalg.norm(pts - np.asarray(cfg.proton), axis=-1)
    de = np.linalg.norm(pts - np.asarray(cfg.electron), axis=-1)
    if np.any(dp == 0.0) or np.any(de == 0.0):
        raise SingularityError("Coulomb potential evaluated at a charge location")
    value = 1.0 / dp - 1.0 / de
    return float(value) if np.ndim(value) == 0 else value


def approx_field(s: ArrayLike, cfg: DipoleConfig) -> NDArray[np.float64]:
    """
    Coulomb-approximation field strength E_approx = e_from_d(D_C, beta).

    Bounded by 1/beta^2 even arbitrarily close to the charges.

    Args:
        s: Point(s), shape (3,) or (..., 3)
        cfg: Charge configuration

    Returns:
        E_approx with the shape of s
    """
    return e_from_d(coulomb_displacement(s, cfg), cfg.beta)


def field_sample(s: ArrayLike, cfg: DipoleConfig) -> FieldSample:
    """
    Coulomb displacement and approximate field at one point.

    Args:
        s: Point, shape (3,)
        cfg: Charge configuration

    Returns:
        FieldSample carrying D_C and E_approx
    """
    point = Vec3.from_array(s)
    D = coulomb_displacement(point, cfg)
    return FieldSample(point=point, D=Vec3.from_array(D), E=Vec3.from_array(e_from_d(D, cfg.beta)))


def born_field(s: ArrayLike, center: ArrayLike, charge: float, beta: float) -> NDArray[np.float64]:
    """
    Exact field of one isolated Born charge, the gradient field of
    -charge * exact_born_potential(|s - center|, beta).

    Args:
        s: Point(s), shape (3,) or (..., 3)
        center: Charge location
        charge: Charge (+1 or -1)
        beta: Born parameter

    Returns:
        Field strength with the shape of s
    """
    pts = _as_vectors(s, "s")
    b4 = _check_beta(beta) ** 4
    rel = pts - np.asarray(center, dtype=float)
    dist = np.sqrt(np.sum(rel * rel, axis=-1, keepdims=True))
    if np.any(dist == 0.0):
        raise SingularityError("Born field direction undefined at the charge location", charge=charge)
    return charge * rel / (dist * np.sqrt(dist**4 + b4))


def nonlinear_remainder(s: ArrayLike, cfg: DipoleConfig) -> NDArray[np.float64]:
    """
    Part of E_approx that is not a sum of single-charge Born fields.

    N = e(D_C) - e(D_p) - e(D_e). Bounded everywhere for beta > 0 and
    identically zero for beta = 0. All path dependence of E_approx lives here.

    Args:
        s: Point(s), shape (3,) or (..., 3)
        cfg: Charge configuration

    Returns:
        N with the shape of s
    """
    pts = _as_vectors(s, "s")
    if cfg.beta == 0.0:
        return np.zeros_like(pts)
    out = approx_field(pts, cfg)
    for center, charge in cfg.charges:
        out -= born_field(pts, center, charge, cfg.beta)
    return out


def born_pair_potential(s: ArrayLike, cfg: DipoleConfig) -> Scalar:
    """
    Superposed single-charge Born potentials B(|s - s_p|) - B(|s - s_e|).

    Args:
        s: Point(s), shape (3,) or (..., 3)
        cfg: Charge configuration

    Returns:
        Potential value(s)
    """
    pts = _as_vectors(s, "s")
    dp = np.linalg.norm(pts - np.asarray(cfg.proton), axis=-1)
    de = np.linalg.norm(pts - np.asarray(cfg.electron), axis=-1)
    if cfg.beta == 0.0 and (np.any(dp == 0.0) or np.any(de == 0.0)):
        raise SingularityError("Coulomb potential evaluated at a charge location")
    value = np.asarray(exact_born_potential(dp, cfg.beta)) - np.asarray(exact_born_potential(de, cfg.beta))
    return float(value) if np.ndim(value) == 0 else value
