"""
Unit tests for the command-line front end.
"""

import pytest

from borninfeld import __version__
from borninfeld.cli import POTENTIAL_TABLE, SOLUTION_SUBDIR, main
from borninfeld.exceptions import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE


class TestSingle:
    """Tests for the single-charge command."""

    def test_coulomb_value(self, capsys):
        """Test that beta = 0 prints 1/s."""
        code = main(["single", "--beta", "0", "--s", "2"])
        out = capsys.readouterr().out

        assert code == EXIT_OK
        assert out == "s,phi\n2,0.5\n"

    def test_several_distances(self, capsys):
        """Test repeated --s options keep their order."""
        main(["single", "--beta", "1", "--s", "0", "--s", "1"])
        lines = capsys.readouterr().out.splitlines()

        assert lines[0] == "s,phi"
        assert lines[1].startswith("0,1.85407467730137")
        assert len(lines) == 3

    def test_domain_error(self, capsys):
        """Test that s = beta = 0 exits with the numerical code."""
        code = main(["single", "--beta", "0", "--s", "0"])
        captured = capsys.readouterr()

        assert code == EXIT_NUMERICAL
        assert captured.out == ""
        assert "error:" in captured.err


class TestUsage:
    """Tests for argument and configuration errors."""

    def test_unknown_option(self, capsys):
        """Test that unknown options exit with the usage code."""
        assert main(["single", "--bogus"]) == EXIT_USAGE

    def test_version(self, capsys):
        """Test the version flag."""
        assert main(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_invalid_workers(self, capsys):
        """Test that configuration errors name the key."""
        code = main(["--workers", "0", "single", "--beta", "0", "--s", "1"])

        assert code == EXIT_USAGE
        assert "sweep.workers" in capsys.readouterr().err

    def test_unknown_config_section(self, tmp_path, capsys):
        """Test that a config file with an unknown section is rejected."""
        config = tmp_path / "run.yaml"
        config.write_text("plotting:\n  dpi: 300\n")

        code = main(["--config", str(config), "single", "--beta", "0", "--s", "1"])

        assert code == EXIT_USAGE
        assert "plotting" in capsys.readouterr().err

    def test_malformed_environment(self, monkeypatch, capsys):
        """Test that an undecodable environment value exits with the usage code."""
        monkeypatch.setenv("BORNLAB_SWEEP_BETAS", "[0.1,")

        code = main(["single", "--beta", "0", "--s", "1"])

        assert code == EXIT_USAGE
        assert "sweep.betas" in capsys.readouterr().err

    def test_help_lists_config_keys(self, capsys):
        """Test that help output documents configuration keys."""
        assert main(["minimize", "--help"]) == EXIT_OK
        assert "grid.n_rho" in capsys.readouterr().out


class TestSweeps:
    """Tests for the audit, minimize and spectrum commands."""

    def test_audit_coulomb_row(self, capsys):
        """Test the beta = 0 audit row."""
        code = main(["audit", "--beta", "0", "--r", "1"])
        lines = capsys.readouterr().out.splitlines()

        assert code == EXIT_OK
        assert lines == ["beta,r,V_A,V_B,delta,circulation", "0,1,-1,-1,0,0"]

    def test_audit_to_file(self, tmp_path, capsys):
        """Test --out redirection."""
        out = tmp_path / "audit.csv"

        assert main(["audit", "--beta", "0", "--r", "1", "--out", str(out)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert out.read_text().splitlines()[1] == "0,1,-1,-1,0,0"

    def test_minimize_path_table(self, tmp_path, capsys):
        """Test that minimize writes the potential table."""
        code = main([
            "--output-dir", str(tmp_path), "minimize",
            "--beta", "0", "--r", "1", "--r", "2", "--method", "path_A",
        ])

        assert code == EXIT_OK
        assert (tmp_path / POTENTIAL_TABLE).read_text() == "r,V,beta,method\n1,-1,0,path_A\n2,-0.5,0,path_A\n"
        assert not (tmp_path / SOLUTION_SUBDIR).exists()

    def test_minimize_variational_files(self, tmp_path, capsys):
        """Test that a variational run writes solution files that verify cleanly."""
        args = ["minimize", "--beta", "0.1", "--r", "1", "--r", "2", "--n-rho", "17", "--n-z", "17"]

        assert main(["--output-dir", str(tmp_path / "first")] + args) == EXIT_OK
        solutions = sorted((tmp_path / "first" / SOLUTION_SUBDIR).iterdir())
        lines = (tmp_path / "first" / POTENTIAL_TABLE).read_text().splitlines()

        assert len(solutions) == 2
        assert lines[0] == "r,V,beta,method"
        assert [line.split(",")[2:] for line in lines[1:]] == [["0.10000000000000001", "variational"]] * 2

        verify = ["verify", "--check", "solution_round_trip"]
        for path in solutions:
            verify += ["--solution", str(path)]
        capsys.readouterr()
        assert main(verify) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["PASS solution_round_trip"] * 2

    def test_minimize_rerun_identical(self, tmp_path):
        """Test that identical runs give byte-identical tables."""
        args = ["minimize", "--beta", "0.1", "--r", "1", "--r", "2", "--n-rho", "17", "--n-z", "17"]
        for name in ("first", "second"):
            assert main(["--output-dir", str(tmp_path / name)] + args) == EXIT_OK

        first = (tmp_path / "first" / POTENTIAL_TABLE).read_bytes()
        second = (tmp_path / "second" / POTENTIAL_TABLE).read_bytes()
        assert first == second

    def test_minimize_unwritable_output_dir(self, tmp_path, capsys):
        """Test that an output directory that cannot be created exits with the I/O code."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")

        code = main([
            "--output-dir", str(blocker / "out"), "minimize",
            "--beta", "0", "--r", "1", "--method", "path_A",
        ])

        assert code == EXIT_IO
        assert "blocker" in capsys.readouterr().err

    def test_metrics_file_after_solve(self, tmp_path):
        """Test that --metrics-file exports the solve counters."""
        metrics = tmp_path / "metrics.prom"

        code = main([
            "--output-dir", str(tmp_path), "--metrics-file", str(metrics), "minimize",
            "--beta", "0.1", "--r", "2", "--n-rho", "17", "--n-z", "17",
        ])
        text = metrics.read_text()

        assert code == EXIT_OK
        assert 'borninfeld_solves_total{parity="odd",status="converged"}' in text
        assert "borninfeld_solve_iterations_count" in text

    def test_minimize_rejects_unordered_separations(self, tmp_path, capsys):
        """Test separation ordering validation."""
        code = main(["--output-dir", str(tmp_path), "minimize", "--beta", "0", "--r", "2", "--r", "1"])

        assert code == EXIT_USAGE
        assert "sweep.separations" in capsys.readouterr().err

    def test_spectrum_from_table(self, tmp_path, capsys):
        """Test level shifts from a written table."""
        table = tmp_path / "table.csv"
        table.write_text("r,V,beta,method\n0.5,-2,0,path_A\n1,-1,0,path_A\n2,-0.5,0,path_A\n4,-0.25,0,path_A\n")

        code = main(["spectrum", "--table", str(table), "--n-max", "2", "--ell-max", "1"])
        lines = capsys.readouterr().out.splitlines()

        assert code == EXIT_OK
        assert lines[0] == "n,ell,E,shift,beta,method"
        assert [line.split(",")[:2] for line in lines[1:]] == [["1", "0"], ["2", "0"], ["2", "1"]]

    def test_spectrum_missing_table(self, tmp_path, capsys):
        """Test that an absent table exits with the I/O code."""
        code = main(["spectrum", "--table", str(tmp_path / "absent.csv")])

        assert code == EXIT_IO
        assert "absent.csv" in capsys.readouterr().err


class TestVerify:
    """Tests for the verify command."""

    def test_single_check(self, capsys):
        """Test a passing check."""
        code = main(["verify", "--check", "config_totality"])

        assert code == EXIT_OK
        assert capsys.readouterr().out == "PASS config_totality\n"

    def test_injected_bug_fails(self, capsys):
        """Test that the hidden bug flag turns the guard into a failure."""
        code = main(["verify", "--check", "centrifugal_guard", "--inject-centrifugal-bug"])

        assert code == EXIT_NUMERICAL
        assert capsys.readouterr().out.startswith("FAIL centrifugal_guard: ")

    @pytest.mark.parametrize("check", ["bogus", ""])
    def test_unknown_check(self, capsys, check):
        """Test that unknown check names are usage errors."""
        assert main(["verify", "--check", check]) == EXIT_USAGE
