"""
Exception hierarchy for borninfeld-lab.

Every error carries structured context for logging and the process exit code
the command-line front end maps it to.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class BornLabError(Exception):
    """Base class for all laboratory errors."""

    exit_code: int = EXIT_NUMERICAL

    def __init__(self, message: str, **context: Any):
        """
        Initialize error.

        Args:
            message: Human-readable description
            **context: Structured fields attached to log records
        """
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            **{k: v for k, v in self.context.items() if _is_plain(v)},
        }


def _is_plain(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool, type(None), tuple, list))


class InvalidInputError(BornLabError, ValueError):
    """Non-finite or malformed input."""

    exit_code = EXIT_USAGE


class ConfigurationError(BornLabError, ValueError):
    """Invalid configuration key or value, or infeasible grid geometry."""

    exit_code = EXIT_USAGE


class DomainError(BornLabError, ValueError):
    """Input outside the mathematical domain (Born saturation, s = beta = 0)."""

    exit_code = EXIT_NUMERICAL


class SingularityError(DomainError):
    """Coulomb field evaluated exactly at a charge location."""


class AccuracyError(BornLabError, ArithmeticError):
    """Quadrature did not reach the requested tolerance within its budget."""

    def __init__(self, message: str, error_estimate: float, **context: Any):
        super().__init__(message, error_estimate=error_estimate, **context)
        self.error_estimate = error_estimate


class NonConvergenceError(BornLabError, ArithmeticError):
    """Minimization exhausted its iteration budget."""

    def __init__(self, message: str, report: Optional[Any] = None, **context: Any):
        super().__init__(message, **context)
        self.report = report


class PartialSpectrumError(BornLabError, ArithmeticError):
    """Fewer bound states than requested were found."""

    def __init__(self, message: str, found: Any = (), **context: Any):
        super().__init__(message, **context)
        self.found = found


class ExtractionError(BornLabError):
    """A member of a potential tabulation failed."""

    def __init__(self, message: str, separation: float, **context: Any):
        super().__init__(message, separation=separation, **context)
        self.separation = separation


class PersistenceError(BornLabError, OSError):
    """Unreadable, unwritable or corrupt solution/table file."""

    exit_code = EXIT_IO

    def __init__(self, message: str, path: Any = None, **context: Any):
        super().__init__(message, path=str(path) if path is not None else None, **context)
        self.path = path
