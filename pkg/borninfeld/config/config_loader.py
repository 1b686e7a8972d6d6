"""
Configuration Loader for borninfeld-lab

Handles loading and validation of run configuration from environment
variables, YAML (or JSON) files and command-line overrides using Pydantic for
schema validation. Precedence: defaults < environment < file < overrides.
"""

import os
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Type

import yaml
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic_settings import SettingsError

from borninfeld.exceptions import ConfigurationError


class PotentialMethod(str, Enum):
    """Estimator used to build an interaction potential."""

    VARIATIONAL = "variational"
    PATH_A = "path_A"
    PATH_B = "path_B"


class SweepSettings(BaseSettings):
    """Parameter sweep configuration."""

    betas: List[float] = Field(default=[0.0, 0.1, 0.3], description="Born parameters (Bohr radii)")
    separations: List[float] = Field(
        default=[0.5, 1.0, 2.0, 4.0], description="Charge separations r (Bohr radii)"
    )
    method: PotentialMethod = Field(
        default=PotentialMethod.VARIATIONAL, description="variational, path_A or path_B"
    )
    workers: Optional[int] = Field(
        default=None, ge=1, description="Worker pool size (default: available CPUs)"
    )

    model_config = SettingsConfigDict(env_prefix="BORNLAB_SWEEP_", extra="forbid")

    @field_validator("betas")
    @classmethod
    def _betas_valid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("must not be empty")
        if any(not 0 <= b < float("inf") for b in v):
            raise ValueError("beta values must be finite and >= 0")
        return v

    @field_validator("separations")
    @classmethod
    def _separations_valid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("must not be empty")
        if any(not 0 < r < float("inf") for r in v):
            raise ValueError("separations must be > 0")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("separations must be strictly increasing")
        return v


class GridSettings(BaseSettings):
    """Axisymmetric grid and minimizer configuration."""

    n_rho: int = Field(default=129, ge=16, description="Radial node count")
    n_z: int = Field(default=129, ge=16, description="Axial node count")
    extent_factor: float = Field(default=10.0, ge=5.0, description="Domain size in units of r")
    tol: float = Field(default=1e-8, gt=0, description="Gradient-norm tolerance")
    max_iter: int = Field(default=100_000, ge=1, description="Iteration budget")
    history: int = Field(default=8, ge=1, description="L-BFGS memory length")
    hessian_refresh: int = Field(default=5, ge=1, description="Iterations between Hessian refreshes")
    progress_every: int = Field(default=50, ge=1, description="Progress log cadence (iterations)")

    model_config = SettingsConfigDict(env_prefix="BORNLAB_GRID_", extra="forbid")


class RadialSettings(BaseSettings):
    """Radial Schrodinger solver configuration."""

    r_min: float = Field(default=1e-4, gt=0, description="Inner mesh radius (Bohr radii)")
    r_max: float = Field(default=80.0, gt=0, description="Outer mesh radius (Bohr radii)")
    points: int = Field(default=4000, ge=16, description="Mesh points")
    n_max: int = Field(default=4, ge=1, description="Highest principal quantum number")
    ell_max: int = Field(default=2, ge=0, description="Highest orbital quantum number")
    inner_boundary: str = Field(default="regular", description="'regular' or 'dirichlet'")

    model_config = SettingsConfigDict(env_prefix="BORNLAB_RADIAL_", extra="forbid")

    @field_validator("inner_boundary")
    @classmethod
    def _boundary_known(cls, v: str) -> str:
        if v not in ("regular", "dirichlet"):
            raise ValueError("must be 'regular' or 'dirichlet'")
        return v

    @model_validator(mode="after")
    def _ranges_consistent(self) -> "RadialSettings":
        if self.r_max <= self.r_min:
            raise ValueError("r_max must exceed r_min")
        if self.ell_max >= self.n_max:
            raise ValueError("ell_max must be smaller than n_max")
        return self


class QuadratureSettings(BaseSettings):
    """Line-integral quadrature configuration."""

    tol: float = Field(default=1e-10, gt=0, description="Absolute error budget per integral")
    limit: int = Field(default=400, ge=10, description="Subinterval budget per segment")

    model_config = SettingsConfigDict(env_prefix="BORNLAB_QUAD_", extra="forbid")


class OutputSettings(BaseSettings):
    """Output location configuration."""

    dir: Path = Field(default=Path("results"), description="Output directory")
    metrics_file: Optional[Path] = Field(
        default=None, description="Prometheus textfile written when a command finishes (default: none)"
    )

    model_config = SettingsConfigDict(env_prefix="BORNLAB_OUTPUT_", extra="forbid")


class LoggingSettings(BaseSettings):
    """Logging Configuration."""

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(default="text", description="Log format (json or text)")

    model_config = SettingsConfigDict(env_prefix="BORNLAB_LOG_", extra="forbid")

    @field_validator("level")
    @classmethod
    def _level_known(cls, v: str) -> str:
        if v.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError("unknown log level")
        return v.upper()

    @field_validator("format")
    @classmethod
    def _format_known(cls, v: str) -> str:
        if v not in ("json", "text"):
            raise ValueError("must be 'json' or 'text'")
        return v


SECTIONS: Dict[str, Type[BaseSettings]] = {
    "sweep": SweepSettings,
    "grid": GridSettings,
    "radial": RadialSettings,
    "quadrature": QuadratureSettings,
    "output": OutputSettings,
    "logging": LoggingSettings,
}


class RunConfig:
    """
    Centralized run configuration.

    Aggregates one validated settings object per section. Build instances
    with :func:`load_config`.
    """

    def __init__(self, sections: Mapping[str, BaseSettings]):
        """
        Initialize configuration.

        Args:
            sections: Validated settings object per section name
        """
        self.sweep: SweepSettings = sections["sweep"]  # type: ignore[assignment]
        self.grid: GridSettings = sections["grid"]  # type: ignore[assignment]
        self.radial: RadialSettings = sections["radial"]  # type: ignore[assignment]
        self.quadrature: QuadratureSettings = sections["quadrature"]  # type: ignore[assignment]
        self.output: OutputSettings = sections["output"]  # type: ignore[assignment]
        self.logging: LoggingSettings = sections["logging"]  # type: ignore[assignment]

    @property
    def workers(self) -> int:
        """Worker pool size, defaulting to available parallelism."""
        return self.sweep.workers or os.cpu_count() or 1

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert configuration to dictionary.

        Returns:
            Dictionary representation of configuration
        """
        return {name: getattr(self, name).model_dump(mode="json") for name in SECTIONS}


def _read_file(config_file: Path) -> Dict[str, Any]:
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {config_file}: {e}", key="config") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"config file {config_file} is not valid YAML/JSON: {e}", key="config") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(
            f"config file {config_file} must contain a mapping of sections", key="config"
        )
    return data


def _merge(file_data: Mapping[str, Any], overrides: Mapping[str, Mapping[str, Any]]) -> Dict[str, Dict[str, Any]]:
    unknown = sorted(str(k) for k in file_data if k not in SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown config section(s): {', '.join(unknown)}", key=unknown[0])

    merged: Dict[str, Dict[str, Any]] = {}
    for name in SECTIONS:
        values = file_data.get(name) or {}
        if not isinstance(values, dict):
            raise ConfigurationError(f"config section '{name}' must be a mapping", key=name)
        section = dict(values)
        section.update({k: v for k, v in (overrides.get(name) or {}).items() if v is not None})
        merged[name] = section
    return merged


def _describe(name: str, error: ValidationError) -> ConfigurationError:
    problems = []
    keys = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item.get("loc", ()))
        key = f"{name}.{loc}" if loc else name
        keys.append(key)
        problems.append(f"{key}: {item.get('msg', 'invalid value')}")
    return ConfigurationError("invalid configuration: " + "; ".join(problems), key=keys[0] if keys else name)


def _describe_source(name: str, error: Exception) -> ConfigurationError:
    """Environment values that cannot be decoded, e.g. malformed JSON lists."""
    match = re.search(r'field "([^"]+)"', str(error))
    key = f"{name}.{match.group(1)}" if match else name
    cause = error.__cause__ or error
    return ConfigurationError(f"invalid configuration: {key}: {cause}", key=key)


def load_config(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> RunConfig:
    """
    Load configuration from file, environment and overrides.

    Args:
        config_file: Optional path to a YAML or JSON configuration file
        overrides: Optional per-section values taking precedence over the file
            (``None`` values are ignored, so unset CLI flags fall through)

    Returns:
        Validated configuration

    Raises:
        ConfigurationError: Naming the offending key for any malformed input
    """
    file_data = _read_file(config_file) if config_file is not None else {}
    merged = _merge(file_data, overrides or {})

    sections: Dict[str, BaseSettings] = {}
    for name, model in SECTIONS.items():
        try:
            sections[name] = model(**merged[name])
        except ValidationError as e:
            raise _describe(name, e) from e
        except (SettingsError, TypeError, ValueError) as e:
            raise _describe_source(name, e) from e
    return RunConfig(sections)


def describe_keys() -> List[str]:
    """
    Describe every configuration key for ``--help`` output.

    Returns:
        One ``section.key: description (default)`` line per key
    """
    lines = []
    for name, model in SECTIONS.items():
        for key, info in model.model_fields.items():
            lines.append(f"{name}.{key}: {info.description} (default {info.default!r})")
    return lines
