"""
Logging Module

JSON and text formatters plus helpers that configure the ``borninfeld``
logger tree.
"""

from typing import List

__all__: List[str] = []
