"""
Axisymmetric quarter-plane grid.

Nodes (rho_i, z_j) cover [0, rho_max] x [0, z_max]. Arrays over the grid are
indexed [j, i], z outer and rho inner.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from borninfeld.exceptions import ConfigurationError
from borninfeld.fields.bi_fields import DipoleConfig

logger = logging.getLogger(__name__)

MIN_NODES = 16
MIN_EXTENT_FACTOR = 5.0


@dataclass(frozen=True)
class AxisymGrid:
    """Uniform node lattice on the (rho, z) quarter plane."""

    n_rho: int
    n_z: int
    rho_max: float
    z_max: float
    charge_row: int
    requested_z_max: float

    @property
    def h_rho(self) -> float:
        return self.rho_max / (self.n_rho - 1)

    @property
    def h_z(self) -> float:
        return self.z_max / (self.n_z - 1)

    @property
    def h(self) -> float:
        """Larger of the two spacings."""
        return max(self.h_rho, self.h_z)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_z, self.n_rho)

    @property
    def size(self) -> int:
        return self.n_z * self.n_rho

    @property
    def rho(self) -> np.ndarray:
        return np.arange(self.n_rho) * self.h_rho

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.n_z) * self.h_z

    @property
    def charge_z(self) -> float:
        """z coordinate of the proton node."""
        return self.charge_row * self.h_z

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(rho, z) coordinate arrays of shape (n_z, n_rho)."""
        return np.meshgrid(self.rho, self.z)

    def points(self) -> np.ndarray:
        """Cartesian node positions in the x,z half-plane, shape (n_z, n_rho, 3)."""
        rho, z = self.mesh()
        return np.stack([rho, np.zeros_like(rho), z], axis=-1)

    def describe(self) -> str:
        return (
            f"{self.n_rho}x{self.n_z} nodes, rho_max={self.rho_max:.6g}, z_max={self.z_max:.6g} "
            f"(requested {self.requested_z_max:.6g}), h_rho={self.h_rho:.6g}, h_z={self.h_z:.6g}"
        )


def build_grid(cfg: DipoleConfig, n_rho: int, n_z: int, extent_factor: float = 10.0) -> AxisymGrid:
    """
    Build a grid whose axis has a node exactly at the proton, z = r/2.

    The requested axial spacing extent_factor * r / (n_z - 1) is enlarged to
    the nearest value that divides r/2, so z_max is rounded up.

    Args:
        cfg: Charge configuration
        n_rho: Radial node count (>= 16)
        n_z: Axial node count (>= 16)
        extent_factor: Domain size in units of r (>= 5)

    Returns:
        AxisymGrid

    Raises:
        ConfigurationError: For resolutions or extents outside the supported range
    """
    if int(n_rho) < MIN_NODES or int(n_z) < MIN_NODES:
        raise ConfigurationError(
            f"grid resolution must be at least {MIN_NODES} nodes per direction",
            key="grid.n_rho" if int(n_rho) < MIN_NODES else "grid.n_z",
        )
    if not math.isfinite(extent_factor) or extent_factor < MIN_EXTENT_FACTOR:
        raise ConfigurationError(
            f"extent_factor must be >= {MIN_EXTENT_FACTOR:g}, got {extent_factor!r}", key="grid.extent_factor"
        )

    r = cfg.separation
    extent = extent_factor * r
    h0 = extent / (n_z - 1)
    steps = max(1, math.floor(0.5 * r / h0 + 1e-9))
    h_z = 0.5 * r / steps
    z_max = h_z * (n_z - 1)

    grid = AxisymGrid(
        n_rho=int(n_rho),
        n_z=int(n_z),
        rho_max=extent,
        z_max=z_max,
        charge_row=steps,
        requested_z_max=extent,
    )
    logger.debug(f"Built grid: {grid.describe()}", extra={"separation": r})
    return grid
