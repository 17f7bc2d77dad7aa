"""Laboratory version information.

The version is recorded in every emitted report and printed by
``muskat-lab --version``. Format: Semantic Versioning (MAJOR.MINOR.PATCH)
"""

try:
    from ._version import __version__
except ImportError:  # source checkout without a build
    __version__ = "0.1.0"


def get_version() -> str:
    """Get the version stamped into reports."""
    return __version__
