"""
CSV tables for potentials, spectra and path audits.

All tables are written with pandas at 17 significant digits and a fixed
column order, so identical inputs give byte-identical files.
"""

import io
import logging
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd

from borninfeld.exceptions import BornLabError, PersistenceError
from borninfeld.extraction.potential_extraction import RadialPotential
from borninfeld.solvers.schrodinger import SpectrumResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

POTENTIAL_COLUMNS = ["r", "V", "beta", "method"]
SPECTRUM_COLUMNS = ["n", "ell", "E", "shift", "beta", "method"]
AUDIT_COLUMNS = ["beta", "r", "V_A", "V_B", "delta", "circulation"]
SINGLE_COLUMNS = ["s", "phi"]

Destination = Union[str, Path, TextIO]


def to_csv(frame: pd.DataFrame, destination: Optional[Destination] = None) -> str:
    """
    Render a table as CSV and optionally write it.

    Args:
        frame: Table to render
        destination: File path (parents created) or open text stream

    Returns:
        The CSV text

    Raises:
        PersistenceError: If the file cannot be written
    """
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    text = buffer.getvalue()
    if destination is None:
        return text
    if isinstance(destination, (str, Path)):
        path = Path(destination)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise PersistenceError(f"cannot write table {path}: {e}", path=path) from e
        logger.info(f"Wrote {len(frame)} rows to {path}")
    else:
        destination.write(text)
    return text


def potential_frame(potentials: Iterable[RadialPotential]) -> pd.DataFrame:
    rows = [
        {"r": r, "V": v, "beta": p.beta, "method": p.method}
        for p in potentials
        for r, v in p.samples
    ]
    return pd.DataFrame(rows, columns=POTENTIAL_COLUMNS)


def spectrum_frame(results: Iterable[SpectrumResult]) -> pd.DataFrame:
    rows = [row for result in results for row in result.to_rows()]
    return pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)


def audit_frame(rows: Sequence[Mapping[str, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=AUDIT_COLUMNS)


def single_frame(s: Sequence[float], phi: Sequence[float]) -> pd.DataFrame:
    return pd.DataFrame({"s": list(s), "phi": list(phi)}, columns=SINGLE_COLUMNS)


def write_potential_csv(potentials: Union[RadialPotential, Sequence[RadialPotential]], destination: Destination) -> str:
    """Write `r,V,beta,method` rows."""
    if isinstance(potentials, RadialPotential):
        potentials = [potentials]
    return to_csv(potential_frame(potentials), destination)


def write_spectrum_csv(results: Union[SpectrumResult, Sequence[SpectrumResult]], destination: Destination) -> str:
    """Write `n,ell,E,shift,beta,method` rows."""
    if isinstance(results, SpectrumResult):
        results = [results]
    return to_csv(spectrum_frame(results), destination)


def write_audit_csv(rows: Sequence[Mapping[str, float]], destination: Destination) -> str:
    """Write `beta,r,V_A,V_B,delta,circulation` rows."""
    return to_csv(audit_frame(rows), destination)


def read_potential_csv(path: Union[str, Path], beta: Optional[float] = None) -> List[RadialPotential]:
    """
    Read a potential table.

    Args:
        path: CSV file with columns r,V,beta,method
        beta: Keep only rows with this Born parameter

    Returns:
        One RadialPotential per (beta, method) group, in first-seen order

    Raises:
        PersistenceError: Naming the file for unreadable or malformed tables
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"method": str})
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise PersistenceError(f"cannot read potential table {path}: {e}", path=path) from e

    missing = [c for c in POTENTIAL_COLUMNS if c not in frame.columns]
    if missing:
        raise PersistenceError(f"{path}: missing column(s) {', '.join(missing)}", path=path)
    if beta is not None:
        frame = frame[np.isclose(frame["beta"].to_numpy(dtype=float), beta, rtol=0.0, atol=1e-15)]
    if frame.empty:
        raise PersistenceError(f"{path}: no potential rows" + ("" if beta is None else f" for beta={beta:g}"), path=path)

    potentials = []
    try:
        for (b, method), group in frame.groupby(["beta", "method"], sort=False):
            group = group.sort_values("r", kind="stable")
            potentials.append(
                RadialPotential(
                    r=group["r"].to_numpy(dtype=float),
                    V=group["V"].to_numpy(dtype=float),
                    beta=float(b),
                    method=str(method),
                )
            )
    except (BornLabError, ValueError) as e:
        raise PersistenceError(f"{path}: malformed potential rows ({e})", path=path) from e
    return potentials
