"""Pytest configuration and fixtures."""

import os

import numpy as np
import pytest

# Environment defaults must be in place before the package is imported
os.environ["LAB_THREADS"] = "1"
os.environ["LAB_LOG_LEVEL"] = "WARNING"
os.environ["LAB_TENSOR_NODES"] = "12"
os.environ["LAB_TIME_NODES"] = "32"
os.environ["LAB_PREFACTOR"] = "pi"
os.environ["LAB_MAX_TUPLES"] = "200000"
os.environ["LAB_SEED"] = "7"


@pytest.fixture(scope="session")
def small_family():
    """ell = 1 family with the single index N = 4."""
    from lab.src.sequences import generate_family

    return generate_family(ell=1, p=1.0, q=4.0, epsilon=0.1, delta=0.0, M=5, N=4)


@pytest.fixture(scope="session")
def ell2_family():
    """ell = 2 family with the single index N = 4."""
    from lab.src.sequences import generate_family

    return generate_family(ell=2, p=1.0, q=6.0, epsilon=0.1, delta=0.0, M=7, N=4)


@pytest.fixture(scope="session")
def two_index_family():
    """ell = 1 family with indices 4 and 5 and the stated recursion."""
    from lab.src.sequences import generate_family

    return generate_family(ell=1, p=1.0, q=4.0, epsilon=0.1, delta=0.25, M=5, N=4)


@pytest.fixture
def rng():
    """Seeded numpy Generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Temporary output directory, also exported as LAB_OUTPUT_DIR."""
    target = tmp_path / "out"
    monkeypatch.setenv("LAB_OUTPUT_DIR", str(target))
    return target
