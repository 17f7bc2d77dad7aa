"""Error types raised by the laboratory.

The CLI maps these onto exit codes (see ``main.py``).
"""


class LabError(Exception):
    """Base class for all laboratory errors."""


class ArgumentError(LabError, ValueError):
    """Invalid argument: dimension mismatch, negative time, boundary values."""


class ToleranceError(LabError):
    """A quadrature could not reach its tolerance within the given budget.

    Args:
        message: Human readable reason
        estimate: Best value obtained before giving up
        error_bound: Error bound that was achieved for ``estimate``
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class CapacityError(LabError):
    """A magnitude cap, node budget or tuple budget was exceeded."""
