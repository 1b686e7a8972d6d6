"""
Adaptive quadrature helpers.

Thin wrappers around :func:`scipy.integrate.quad` that turn QUADPACK
warnings into :class:`AccuracyError` and integrate a function over a list of
breakpoints with a shared error budget.
"""

import logging
from typing import Callable, Sequence, Tuple

from scipy import integrate

from borninfeld.exceptions import AccuracyError

logger = logging.getLogger(__name__)


def integrate_piece(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    rel_tol: float = 0.0,
    limit: int = 400,
) -> Tuple[float, float]:
    """
    Integrate a scalar function on [a, b].

    Args:
        func: Integrand
        a: Lower limit
        b: Upper limit
        tol: Absolute error target
        rel_tol: Relative error target
        limit: Maximum number of subintervals

    Returns:
        Tuple of (value, error estimate)

    Raises:
        AccuracyError: If QUADPACK reports any failure
    """
    result = integrate.quad(func, a, b, epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1)
    value, error = float(result[0]), float(result[1])
    # A fourth element is QUADPACK's failure message
    if len(result) > 3:
        raise AccuracyError(
            f"quadrature on [{a:.6g}, {b:.6g}] did not converge: {result[3]}",
            error_estimate=error,
            tol=tol,
        )
    return value, error


def integrate_breakpoints(
    func: Callable[[float], float],
    breakpoints: Sequence[float],
    tol: float,
    limit: int = 400,
) -> Tuple[float, float]:
    """
    Integrate over consecutive breakpoint intervals.

    The absolute budget is split evenly between the pieces.

    Args:
        func: Integrand
        breakpoints: Increasing abscissae, first and last are the limits
        tol: Absolute error budget for the whole integral
        limit: Subinterval budget per piece

    Returns:
        Tuple of (value, summed error estimate)

    Raises:
        AccuracyError: With the summed error estimate if any piece fails
    """
    pieces = len(breakpoints) - 1
    if pieces < 1:
        return 0.0, 0.0

    piece_tol = tol / pieces
    total = 0.0
    error = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        try:
            value, err = integrate_piece(func, a, b, tol=piece_tol, rel_tol=1e-13, limit=limit)
        except AccuracyError as e:
            raise AccuracyError(
                f"path integral missed its tolerance on [{a:.6g}, {b:.6g}]",
                error_estimate=error + e.error_estimate,
                tol=tol,
            ) from e
        total += value
        error += err

    logger.debug(f"Integrated {pieces} pieces, error estimate {error:.3e}")
    return total, error
