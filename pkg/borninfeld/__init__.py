"""
borninfeld-lab - Born-Infeld two-charge laboratory

Minimizes the Born-Infeld electrostatic action for a pair of opposite unit
point charges on an axisymmetric grid, audits the path dependence of the
Coulomb-field approximation, and propagates the resulting interaction
potential into hydrogen Schrodinger level shifts.
"""

__version__ = "0.1.0"
__license__ = "TBD"

__all__ = ["fields", "solvers", "extraction", "storage", "verification"]
