"""
Storage Module

Solution files and CSV tables.
"""

from borninfeld.storage.solution_store import load_solution, save_solution
from borninfeld.storage.tables import (
    read_potential_csv,
    write_audit_csv,
    write_potential_csv,
    write_spectrum_csv,
)

__all__ = [
    "load_solution",
    "read_potential_csv",
    "save_solution",
    "write_audit_csv",
    "write_potential_csv",
    "write_spectrum_csv",
]
