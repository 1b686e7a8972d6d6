"""
Metrics Module

Prometheus collectors for solver, quadrature and eigensolver activity.
"""

from typing import List

__all__: List[str] = []
