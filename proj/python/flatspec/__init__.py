"""Flat surfaces with cone points: spectra, flows, and cohomological solvers.

Thin wrapper re-exporting the compiled `_flatspec` extension module.
"""
from _flatspec import *  # noqa: F401,F403
import _flatspec as _core

__version__ = "1.0.0"
__all__ = [name for name in dir(_core) if not name.startswith("_")]
