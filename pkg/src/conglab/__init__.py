"""Executable combinatorics of systems of congruences: classification and
reduction, digraph claim certificates, free-product word algebra, explicit
group partitions, exact rotation realizations, and the stage-wise open-set
construction on the sphere."""

from .systems import CongruenceSystem, DslError, format_system, parse_system

__all__ = ["CongruenceSystem", "DslError", "format_system", "parse_system"]
__version__ = "0.1.0"
