"""
Born-Infeld field algebra and Coulomb-approximation line integrals.
"""

from borninfeld.fields.bi_fields import (
    DipoleConfig,
    FieldSample,
    Vec3,
    approx_field,
    born_field,
    born_pair_potential,
    born_potential_quadrature,
    coulomb_displacement,
    coulomb_potential,
    d_from_e,
    e_from_d,
    exact_born_potential,
    field_sample,
    nonlinear_remainder,
)
from borninfeld.fields.paths import (
    Path,
    axial_path_a,
    axial_path_b,
    circulation,
    line_integral_potential,
    meridian_loop,
    path_potentials,
    proton_side_loop,
    remainder_integral,
)

__all__ = [
    "DipoleConfig",
    "FieldSample",
    "Path",
    "Vec3",
    "approx_field",
    "axial_path_a",
    "axial_path_b",
    "born_field",
    "born_pair_potential",
    "born_potential_quadrature",
    "circulation",
    "coulomb_displacement",
    "coulomb_potential",
    "d_from_e",
    "e_from_d",
    "exact_born_potential",
    "field_sample",
    "line_integral_potential",
    "meridian_loop",
    "nonlinear_remainder",
    "path_potentials",
    "proton_side_loop",
    "remainder_integral",
]
