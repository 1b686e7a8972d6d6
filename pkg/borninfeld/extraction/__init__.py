"""
Extraction of the separation-dependent interaction potential.
"""

from borninfeld.extraction.potential_extraction import (
    RadialPotential,
    extract_path,
    extract_variational,
    report_flags,
    sample_potential,
    tabulate,
)

__all__ = ["RadialPotential", "extract_path", "extract_variational", "report_flags", "sample_potential", "tabulate"]
