"""
Numerical solvers: the axisymmetric action minimizer and the radial
Schrodinger eigensolver.
"""

from borninfeld.solvers.action_minimizer import (
    ConvergenceReport,
    Parity,
    PotentialSolution,
    action_gradient,
    action_hessian,
    coulomb_reference_error,
    el_residual,
    minimize,
    project_feasible,
    scaled_action,
    self_potential,
)
from borninfeld.solvers.axisym_grid import AxisymGrid, build_grid
from borninfeld.solvers.schrodinger import (
    Eigenpair,
    RadialMesh,
    SpectrumResult,
    born_monopole_potential,
    coulomb_potential_radial,
    solve_radial,
    spectrum_shifts,
)

__all__ = [
    "AxisymGrid",
    "ConvergenceReport",
    "Eigenpair",
    "Parity",
    "PotentialSolution",
    "RadialMesh",
    "SpectrumResult",
    "action_gradient",
    "action_hessian",
    "born_monopole_potential",
    "build_grid",
    "coulomb_potential_radial",
    "coulomb_reference_error",
    "el_residual",
    "minimize",
    "project_feasible",
    "scaled_action",
    "self_potential",
    "solve_radial",
    "spectrum_shifts",
]
