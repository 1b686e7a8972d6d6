"""
Configuration Module

Run configuration sections validated with pydantic and layered from
defaults, environment, YAML files and command-line flags.
"""

from typing import List

__all__: List[str] = []
