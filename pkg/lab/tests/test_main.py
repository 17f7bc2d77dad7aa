"""Tests for the command line interface."""

import json

import pytest

from lab.src.main import (
    EXIT_ARGUMENT,
    EXIT_CAPACITY,
    EXIT_FAILED,
    EXIT_OK,
    build_parser,
    main,
)
from lab.src.sequences import SequenceFamily
from lab.src.version import get_version


@pytest.fixture
def config_file(tmp_path):
    """Experiment file for a cheap single-index sweep."""

    def write(**values):
        base = {"delta": 0.0, "sweep": [4], "time_factors": [2.0]}
        base.update(values)
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(base))
        return str(path)

    return write


class TestParser:
    """Tests for argument parsing and error mapping."""

    def test_version(self, capsys):
        """--version prints the package version."""
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert get_version() in capsys.readouterr().out

    def test_missing_command(self):
        """A missing subcommand is an argument error."""
        assert main([]) == EXIT_ARGUMENT

    def test_unknown_flag(self):
        """Unknown options are argument errors."""
        assert main(["sequence", "gen", "--bogus"]) == EXIT_ARGUMENT

    def test_threads_must_be_positive(self):
        """--threads 0 is rejected."""
        assert main(["--threads", "0", "sequence", "gen"]) == EXIT_ARGUMENT

    def test_time_options_are_exclusive(self):
        """--t and --t-factor cannot be combined."""
        argv = ["iterate", "assemble", "--t", "0.1", "--t-factor", "2"]
        assert main(argv) == EXIT_ARGUMENT

    def test_demo_requires_target(self):
        """inflate demo needs --R."""
        assert main(["inflate", "demo"]) == EXIT_ARGUMENT

    def test_parser_groups(self):
        """Every command group is registered."""
        args = build_parser().parse_args(["oracle", "compare", "--k", "2"])
        assert (args.group, args.action, args.k) == ("oracle", "compare", 2)


class TestCommands:
    """Tests for the individual commands."""

    def test_sequence_gen_and_norm_eval(self, out_dir):
        """Generated families can be reloaded by norm eval."""
        assert main(["sequence", "gen", "--N", "4"]) == EXIT_OK
        family_path = out_dir / "family_N4.json"
        family = SequenceFamily.from_json(family_path.read_text())
        assert family.N == 4
        conditions = json.loads((out_dir / "family_N4.conditions.json").read_text())
        assert all(c["passed"] for c in conditions["conditions"])

        argv = ["norm", "eval", "--family", str(family_path), "--s", "0.5"]
        assert main(argv) == EXIT_OK
        result = json.loads((out_dir / "norm_N4.json").read_text())
        assert result["norm"] > 0
        assert result["norm_at_s"] > 0
        assert result["family_hash"] == conditions["hash"]

    def test_invalid_config(self, config_file, out_dir):
        """A config violating the parameter constraints exits with 1."""
        path = config_file(epsilon=5.0)
        assert main(["--config", path, "sequence", "gen"]) == EXIT_ARGUMENT

    def test_iterate_assemble(self, config_file, out_dir):
        """f_1 is assembled and measured at t = 2 / k_N."""
        path = config_file()
        argv = ["--config", path, "iterate", "assemble", "--t-factor", "2"]
        assert main(argv) == EXIT_OK
        summary = json.loads((out_dir / "iterate_N4_k1.json").read_text())
        assert summary["counts"]["J"] == 6
        assert summary["t"] == pytest.approx(2 / 128)

    def test_ledger_run(self, config_file, tmp_path):
        """A cheap ledger writes the CSV report and the timings sidecar."""
        target = tmp_path / "reports"
        argv = ["--config", config_file(), "--out", str(target), "ledger", "run"]
        assert main(argv + ["--format", "csv"]) == EXIT_OK
        assert (target / "inflation_report.csv").exists()
        assert (target / "timings.json").exists()
        assert not (target / "inflation_report.json").exists()

    def test_inflate_demo_trend_failure(self, config_file, out_dir):
        """A demo over a sweep whose trends fail exits with 2."""
        path = config_file(sweep=[4, 5])
        assert main(["--config", path, "inflate", "demo", "--R", "2"]) == EXIT_FAILED
        report = json.loads((out_dir / "inflation_report.json").read_text())
        assert report["status"] == "FAILED"
        assert report["demo"]["label"]

    def test_capacity_exit_code(self, config_file, out_dir):
        """A sweep beyond 2^60 exits with 3."""
        path = config_file(delta=1.0, sweep=[40])
        assert main(["--config", path, "ledger", "run"]) == EXIT_CAPACITY
