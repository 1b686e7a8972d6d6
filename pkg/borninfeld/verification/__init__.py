"""
Verification Module

Desk-scale invariant suite run by ``borninfeld verify``.
"""

from borninfeld.verification.invariant_suite import CheckResult, InvariantSuite

__all__ = ["CheckResult", "InvariantSuite"]
