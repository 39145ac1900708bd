"""Benchmarking toolchain: run solvers on problems from heterogeneous
collections, gather their standardized result lines into a portable
store, and compare solvers with performance profiles."""

__version__ = "0.1.0"

from .record import LiboptRecord, TokenConfig, TokenPair, parse_line, serialize
from .store import Store

__all__ = [
    "LiboptRecord",
    "TokenConfig",
    "TokenPair",
    "parse_line",
    "serialize",
    "Store",
    "__version__",
]
