"""Tests for environment-driven defaults."""

import pytest

from lab.src import config
from lab.src.schemas import ExperimentConfig


class TestEnvironment:
    """Tests for the LAB_* environment variables."""

    def test_integer_parsing(self, monkeypatch):
        """Integers are parsed and bounded below."""
        monkeypatch.setenv("LAB_THREADS", "3")
        assert config.threads() == 3
        monkeypatch.setenv("LAB_THREADS", "three")
        with pytest.raises(ValueError):
            config.threads()
        monkeypatch.setenv("LAB_THREADS", "0")
        with pytest.raises(ValueError):
            config.threads()

    def test_seed_allows_zero(self, monkeypatch):
        """The seed may be zero."""
        monkeypatch.setenv("LAB_SEED", "0")
        assert config.seed() == 0

    def test_tensor_nodes_minimum(self, monkeypatch):
        """At least two nodes per variable."""
        monkeypatch.setenv("LAB_TENSOR_NODES", "1")
        with pytest.raises(ValueError):
            config.tensor_nodes()

    def test_prefactor_mode(self, monkeypatch):
        """Modes are case-insensitive; unknown modes fail."""
        monkeypatch.setenv("LAB_PREFACTOR", "NO_PI")
        assert config.prefactor_mode() == "no_pi"
        monkeypatch.setenv("LAB_PREFACTOR", "tau")
        with pytest.raises(ValueError):
            config.prefactor_mode()

    def test_log_level(self, monkeypatch):
        """Known levels only."""
        monkeypatch.setenv("LAB_LOG_LEVEL", "debug")
        assert config.log_level() == "DEBUG"
        monkeypatch.setenv("LAB_LOG_LEVEL", "LOUD")
        with pytest.raises(ValueError):
            config.log_level()

    def test_output_dir_default(self, monkeypatch):
        """./out unless LAB_OUTPUT_DIR is set."""
        monkeypatch.delenv("LAB_OUTPUT_DIR", raising=False)
        assert config.output_dir() == "./out"

    def test_experiment_defaults_follow_environment(self, monkeypatch, tmp_path):
        """ExperimentConfig picks up the environment at construction."""
        monkeypatch.setenv("LAB_OUTPUT_DIR", str(tmp_path))
        monkeypatch.setenv("LAB_MAX_TUPLES", "1234")
        cfg = ExperimentConfig()
        assert cfg.output_dir == str(tmp_path)
        assert cfg.max_tuples == 1234
        assert cfg.quadrature.tensor_nodes == 12
