"""
Unit tests for solution file persistence.
"""

import dataclasses

import numpy as np
import pytest

from borninfeld.exceptions import EXIT_IO, InvalidInputError, PersistenceError
from borninfeld.extraction.potential_extraction import extract_variational
from borninfeld.fields.bi_fields import DipoleConfig
from borninfeld.solvers.action_minimizer import minimize
from borninfeld.solvers.axisym_grid import build_grid
from borninfeld.storage.solution_store import MAGIC, load_solution, save_solution


@pytest.fixture(scope="module")
def solution():
    """Converged 17x17 dipole solution for beta = 0.1."""
    cfg = DipoleConfig(separation=2.0, beta=0.1)
    return minimize(build_grid(cfg, 17, 17, 5.0), cfg)


class TestSolutionStore:
    """Tests for saving and loading solutions."""

    def test_round_trip_bit_exact(self, solution, tmp_path):
        """Test that node values and grid survive a round trip unchanged."""
        path = save_solution(solution, tmp_path / "sol.txt")
        loaded = load_solution(path)

        assert loaded.phi.tobytes() == solution.phi.tobytes()
        assert loaded.grid == solution.grid
        assert loaded.cfg == solution.cfg

    def test_rewrite_identical(self, solution, tmp_path):
        """Test that saving a loaded solution reproduces the file."""
        first = save_solution(solution, tmp_path / "a.txt")
        second = save_solution(load_solution(first), tmp_path / "b.txt")

        assert first.read_bytes() == second.read_bytes()

    def test_report_recomputed(self, solution, tmp_path):
        """Test that the loaded report reflects the stored field."""
        loaded = load_solution(save_solution(solution, tmp_path / "sol.txt"))

        assert loaded.report.converged
        assert loaded.report.iterations == 0
        assert loaded.report.grad_norm == pytest.approx(solution.report.grad_norm, rel=1e-9, abs=1e-14)
        assert loaded.report.action == pytest.approx(solution.report.action, rel=1e-12)

    def test_header_format(self, solution, tmp_path):
        """Test the text layout."""
        lines = save_solution(solution, tmp_path / "sol.txt").read_text().splitlines()

        assert lines[0] == MAGIC
        assert lines[1].startswith("# r=2 beta=0.10000000000000001 n_rho=17 n_z=17 ")
        assert len(lines) == 2 + 17 * 17

    def test_parent_directories_created(self, solution, tmp_path):
        """Test writing into a missing directory."""
        path = save_solution(solution, tmp_path / "nested" / "dir" / "sol.txt")

        assert path.exists()

    def test_unconverged_refused(self, solution, tmp_path):
        """Test that unconverged solutions are not persisted."""
        report = dataclasses.replace(solution.report, converged=False)
        stale = dataclasses.replace(solution, report=report)

        with pytest.raises(InvalidInputError):
            save_solution(stale, tmp_path / "sol.txt")

    def test_missing_file(self, tmp_path):
        """Test that unreadable files raise PersistenceError naming the file."""
        path = tmp_path / "absent.txt"

        with pytest.raises(PersistenceError) as excinfo:
            load_solution(path)
        assert str(path) in excinfo.value.message
        assert excinfo.value.exit_code == EXIT_IO

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda lines: ["# something else"] + lines[1:],
            lambda lines: lines[:1] + ["r=2 beta=0.1"] + lines[2:],
            lambda lines: lines[:1] + [lines[1].replace("n_z=17", "")] + lines[2:],
            lambda lines: lines[:-5],
            lambda lines: lines[:10] + ["abc"] + lines[11:],
            lambda lines: lines[:10] + ["nan"] + lines[11:],
            lambda lines: lines[:1] + [lines[1] + " extra=1"] + lines[2:],
        ],
        ids=["magic", "header", "missing-key", "truncated", "garbage", "non-finite", "unknown-key"],
    )
    def test_corrupt_files(self, solution, tmp_path, mutate):
        """Test that corrupt content raises PersistenceError naming the file."""
        good = save_solution(solution, tmp_path / "good.txt")
        bad = tmp_path / "bad.txt"
        bad.write_text("\n".join(mutate(good.read_text().splitlines())) + "\n")

        with pytest.raises(PersistenceError) as excinfo:
            load_solution(bad)
        assert str(bad) in excinfo.value.message

    def test_values_stay_read_only(self, solution, tmp_path):
        """Test that loaded arrays are immutable."""
        loaded = load_solution(save_solution(solution, tmp_path / "sol.txt"))

        assert not loaded.phi.flags.writeable
        assert np.isfinite(loaded.phi).all()

    def test_altered_node_not_converged(self, solution, tmp_path):
        """Test that a field changed after solving loads as unconverged."""
        path = save_solution(solution, tmp_path / "sol.txt")
        lines = path.read_text().splitlines()
        lines[2 + 8 * 17 + 4] = "0.5"
        path.write_text("\n".join(lines) + "\n")

        loaded = load_solution(path)

        assert not loaded.report.converged
        assert loaded.report.grad_norm > 1e-3
        with pytest.raises(InvalidInputError):
            extract_variational(loaded)

    def test_load_tolerance(self, solution, tmp_path):
        """Test that convergence on load is judged against the given tolerance."""
        path = save_solution(solution, tmp_path / "sol.txt")

        assert load_solution(path, tol=1e-8).report.converged
        assert not load_solution(path, tol=solution.report.grad_norm / 10).report.converged
