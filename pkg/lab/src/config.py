"""Environment-driven defaults for the laboratory.

Values come from the process environment (a ``.env`` file in the working
directory is loaded first). Experiment files and CLI flags override them.
"""

import logging
import os

import readenv.loads  # noqa: F401  Load .env file

logger = logging.getLogger(__name__)

PREFACTOR_MODES = ("pi", "no_pi")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    """Read a positive integer from the environment.

    Raises:
        ValueError: If the variable is not an integer or is below ``minimum``
    """
    raw = os.getenv(name, str(default))
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def output_dir() -> str:
    """Directory receiving reports (``LAB_OUTPUT_DIR``, default ``./out``)."""
    return os.getenv("LAB_OUTPUT_DIR", "./out")


def threads() -> int:
    """Worker count for sweep points (``LAB_THREADS``)."""
    return _int_env("LAB_THREADS", 1)


def tensor_nodes() -> int:
    """Gauss-Legendre order per difference variable in R-terms."""
    return _int_env("LAB_TENSOR_NODES", 24, minimum=2)


def time_nodes() -> int:
    """Gauss-Legendre order of the Duhamel time quadrature."""
    return _int_env("LAB_TIME_NODES", 64)


def max_tuples() -> int:
    """Enumeration budget for a single component assembly."""
    return _int_env("LAB_MAX_TUPLES", 200_000)


def seed() -> int:
    """Seed for randomized property sampling (``LAB_SEED``)."""
    return _int_env("LAB_SEED", 0, minimum=0)


def prefactor_mode() -> str:
    """Prefactor convention for f_k: ``pi`` or ``no_pi``.

    Raises:
        ValueError: If ``LAB_PREFACTOR`` holds an unknown mode
    """
    mode = os.getenv("LAB_PREFACTOR", "pi").strip().lower()
    if mode not in PREFACTOR_MODES:
        raise ValueError(
            f"LAB_PREFACTOR must be one of {', '.join(PREFACTOR_MODES)}, got {mode!r}"
        )
    return mode


def log_level() -> str:
    """Root log level (``LAB_LOG_LEVEL``, default ``INFO``)."""
    level = os.getenv("LAB_LOG_LEVEL", "INFO").strip().upper()
    if level not in LOG_LEVELS:
        raise ValueError(f"LAB_LOG_LEVEL must be one of {LOG_LEVELS}, got {level!r}")
    return level


def configure_logging(verbose: bool = False) -> None:
    """Configure the root logger once for command line use."""
    level = logging.DEBUG if verbose else getattr(logging, log_level())
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug(f"Logging configured at {logging.getLevelName(level)}")
