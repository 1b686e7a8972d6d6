"""
Command-line front end for borninfeld-lab.

Subcommands ``single``, ``audit``, ``minimize``, ``spectrum`` and ``verify``.
Standard output carries CSV data only; logs and diagnostics go to standard
error. Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure, 3 I/O failure.
"""

import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click

from borninfeld import __version__
from borninfeld.config.config_loader import PotentialMethod, RunConfig, describe_keys, load_config
from borninfeld.exceptions import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, BornLabError
from borninfeld.fields.bi_fields import exact_born_potential
from borninfeld.logging.logger import setup_logger
from borninfeld.metrics.solver_metrics import get_solver_metrics
from borninfeld.storage.tables import (
    AUDIT_COLUMNS,
    read_potential_csv,
    single_frame,
    to_csv,
    write_audit_csv,
    write_potential_csv,
    write_spectrum_csv,
)
from borninfeld.sweep_manager import SweepManager, SweepOutcome
from borninfeld.verification.invariant_suite import InvariantSuite

logger = logging.getLogger(__name__)

SOLUTION_SUBDIR = "solutions"
POTENTIAL_TABLE = "potentials.csv"


def _keys_epilog(*sections: str) -> str:
    """Configuration keys of the given sections, kept unwrapped by click."""
    lines = [line for line in describe_keys() if not sections or line.split(".", 1)[0] in sections]
    return "\b\nConfiguration keys (file section.key, env BORNLAB_<SECTION>_<KEY>):\n" + "\n".join(
        f"  {line}" for line in lines
    )


@dataclass
class CliState:
    """Global options shared by every subcommand."""

    config_file: Optional[Path] = None
    overrides: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def load(self, **sections: Dict[str, Any]) -> RunConfig:
        """
        Load configuration with subcommand flags layered on top.

        Args:
            **sections: Per-section flag values (None means unset)

        Returns:
            Validated configuration, with logging configured from it
        """
        merged: Dict[str, Dict[str, Any]] = {name: dict(values) for name, values in self.overrides.items()}
        for name, values in sections.items():
            merged.setdefault(name, {}).update(values)
        config = load_config(self.config_file, merged)
        setup_logger("borninfeld", level=config.logging.level, log_format=config.logging.format)
        logger.debug(f"Configuration: {config.to_dict()}")
        ctx = click.get_current_context(silent=True)
        if ctx is not None:
            ctx.call_on_close(lambda: _export_metrics(config.output.metrics_file))
        return config


def _export_metrics(path: Optional[Path]) -> None:
    """Log the solver metrics summary and write the textfile when asked."""
    metrics = get_solver_metrics()
    summary = metrics.get_metrics_summary()
    logger.info(
        "Solver metrics: " + ", ".join(f"{key}={value:g}" for key, value in summary.items()),
        extra={"event_type": "metrics_summary", **summary},
    )
    if path is not None:
        metrics.write_textfile(path)


def _listed(values: Sequence[Any]) -> Optional[List[Any]]:
    return list(values) if values else None


def _sweep_exit(outcomes: Sequence[SweepOutcome]) -> int:
    return max([o.exit_code for o in outcomes], default=EXIT_OK)


@click.group(epilog=_keys_epilog())
@click.version_option(__version__, prog_name="borninfeld")
@click.option(
    "--config", "config_file", type=click.Path(path_type=Path, dir_okay=False), default=None,
    help="YAML or JSON configuration file.",
)
@click.option(
    "--output-dir", type=click.Path(path_type=Path, file_okay=False), default=None,
    help="Output directory (overrides BORNLAB_OUTPUT_DIR and output.dir).",
)
@click.option("--workers", type=int, default=None, help="Worker pool size (default: available CPUs).")
@click.option(
    "--metrics-file", type=click.Path(path_type=Path, dir_okay=False), default=None,
    help="Write solver metrics here in Prometheus text format (overrides output.metrics_file).",
)
@click.option(
    "--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default=None, help="Log level.",
)
@click.option("--log-format", type=click.Choice(["json", "text"]), default=None, help="Log record format.")
@click.pass_context
def cli(
    ctx: click.Context,
    config_file: Optional[Path],
    output_dir: Optional[Path],
    workers: Optional[int],
    metrics_file: Optional[Path],
    log_level: Optional[str],
    log_format: Optional[str],
) -> None:
    """Born-Infeld two-charge laboratory."""
    ctx.obj = CliState(
        config_file=config_file,
        overrides={
            "output": {"dir": output_dir, "metrics_file": metrics_file},
            "sweep": {"workers": workers},
            "logging": {"level": log_level, "format": log_format},
        },
    )


@cli.command("single", epilog=_keys_epilog("logging"))
@click.option("--beta", type=float, required=True, help="Born parameter (Bohr radii).")
@click.option("--s", "distances", type=float, multiple=True, required=True, help="Distance(s) from the charge.")
@click.pass_obj
def cmd_single(state: CliState, beta: float, distances: Sequence[float]) -> int:
    """Print exact single-charge Born potential values as s,phi CSV."""
    state.load()
    values = [exact_born_potential(s, beta) for s in distances]
    click.echo(to_csv(single_frame(distances, values)), nl=False)
    return EXIT_OK


@cli.command("audit", epilog=_keys_epilog("sweep", "quadrature", "output", "logging"))
@click.option("--beta", "betas", type=float, multiple=True, help="Born parameter (repeatable).")
@click.option("--r", "separations", type=float, multiple=True, help="Charge separation (repeatable).")
@click.option("--out", type=click.Path(path_type=Path, dir_okay=False), default=None,
              help="Write the CSV here instead of standard output.")
@click.pass_obj
def cmd_audit(state: CliState, betas: Sequence[float], separations: Sequence[float], out: Optional[Path]) -> int:
    """Path A / path B / circulation audit as beta,r,V_A,V_B,delta,circulation CSV."""
    config = state.load(sweep={"betas": _listed(betas), "separations": _listed(separations)})
    manager = SweepManager(config.workers)
    outcomes = manager.audit(config.sweep.betas, config.sweep.separations, config.quadrature)

    rows = []
    for outcome in outcomes:
        if outcome.ok:
            rows.append(outcome.values)
        else:
            row = {key: math.nan for key in AUDIT_COLUMNS}
            row.update(beta=outcome.point.beta, r=outcome.point.separation)
            rows.append(row)

    if out is None:
        click.echo(write_audit_csv(rows, None), nl=False)
    else:
        write_audit_csv(rows, out)
    return _sweep_exit(outcomes)


@cli.command("minimize", epilog=_keys_epilog("sweep", "grid", "quadrature", "output", "logging"))
@click.option("--beta", "betas", type=float, multiple=True, help="Born parameter (repeatable).")
@click.option("--r", "separations", type=float, multiple=True, help="Charge separation (repeatable).")
@click.option("--method", type=click.Choice([m.value for m in PotentialMethod]), default=None,
              help="Potential estimator (default from sweep.method).")
@click.option("--n-rho", type=int, default=None, help="Radial node count.")
@click.option("--n-z", type=int, default=None, help="Axial node count.")
@click.option("--tol", type=float, default=None, help="Gradient-norm tolerance.")
@click.pass_obj
def cmd_minimize(
    state: CliState,
    betas: Sequence[float],
    separations: Sequence[float],
    method: Optional[str],
    n_rho: Optional[int],
    n_z: Optional[int],
    tol: Optional[float],
) -> int:
    """Run variational solves; write solution files and the r,V,beta,method table."""
    config = state.load(
        sweep={"betas": _listed(betas), "separations": _listed(separations), "method": method},
        grid={"n_rho": n_rho, "n_z": n_z, "tol": tol},
    )
    out_dir = config.output.dir
    manager = SweepManager(config.workers)
    outcomes, potentials = manager.minimize(
        config.sweep.betas,
        config.sweep.separations,
        grid=config.grid,
        quadrature=config.quadrature,
        method=config.sweep.method,
        solution_dir=out_dir / SOLUTION_SUBDIR,
    )
    table = out_dir / POTENTIAL_TABLE
    write_potential_csv(potentials, table)
    logger.info(f"Potential table written to {table}", extra={"event_type": "table_written"})
    return _sweep_exit(outcomes)


@cli.command("spectrum", epilog=_keys_epilog("radial", "sweep", "logging"))
@click.option("--table", "table_file", type=click.Path(path_type=Path, dir_okay=False), required=True,
              help="Potential table (r,V,beta,method CSV).")
@click.option("--beta", type=float, default=None, help="Use only rows with this Born parameter.")
@click.option("--n-max", type=int, default=None, help="Highest principal quantum number.")
@click.option("--ell-max", type=int, default=None, help="Highest orbital quantum number.")
@click.option("--out", type=click.Path(path_type=Path, dir_okay=False), default=None,
              help="Write the CSV here instead of standard output.")
@click.pass_obj
def cmd_spectrum(
    state: CliState,
    table_file: Path,
    beta: Optional[float],
    n_max: Optional[int],
    ell_max: Optional[int],
    out: Optional[Path],
) -> int:
    """Level energies and shifts from Coulomb as n,ell,E,shift,beta,method CSV."""
    config = state.load(radial={"n_max": n_max, "ell_max": ell_max})
    potentials = read_potential_csv(table_file, beta=beta)
    results = SweepManager(config.workers).spectra(potentials, config.radial)
    if out is None:
        click.echo(write_spectrum_csv(results, None), nl=False)
    else:
        write_spectrum_csv(results, out)
    return EXIT_OK


@cli.command("verify", epilog=_keys_epilog("logging"))
@click.option("--solution", "solutions", type=click.Path(path_type=Path, dir_okay=False), multiple=True,
              help="Solution file to round-trip (repeatable).")
@click.option("--check", "checks", type=click.Choice(InvariantSuite.CHECKS), multiple=True,
              help="Run only this check (repeatable).")
@click.option("--inject-centrifugal-bug", is_flag=True, hidden=True)
@click.pass_obj
def cmd_verify(
    state: CliState, solutions: Sequence[Path], checks: Sequence[str], inject_centrifugal_bug: bool
) -> int:
    """Run the invariant suite and print PASS/FAIL per check."""
    config = state.load()
    suite = InvariantSuite(
        inject_centrifugal_bug=inject_centrifugal_bug, solution_files=solutions, solution_tol=config.grid.tol
    )
    results = suite.run(only=checks or None)
    for result in results:
        click.echo(result.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command group and map outcomes to exit codes.

    Args:
        argv: Arguments (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="borninfeld", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_USAGE
    except BornLabError as e:
        logger.debug("Command failed", exc_info=True)
        click.echo(f"error: {e.message}", err=True)
        return e.exit_code
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
