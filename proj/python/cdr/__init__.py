"""Python bindings for the cdr Cech-de Rham Hodge-Laplace library."""

from ._cdr import Scenario, __version__, config_hash, run

__all__ = ["Scenario", "__version__", "config_hash", "run"]
