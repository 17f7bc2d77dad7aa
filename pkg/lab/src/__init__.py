"""Numerical laboratory for norm inflation in truncated Muskat equations."""

from .version import __version__

__all__ = ["__version__"]
