"""Unsharpness measures for quantum observables.

Build a :class:`Povm`, then compute measures with :func:`measure_report` or
the individual functions in :mod:`unsharp.measures`.
"""

from .measures import MeasureReport, measure_report
from .observables import InvalidPovmError, Povm, validate_povm

__version__ = "0.1.0"

__all__ = ["MeasureReport", "measure_report", "InvalidPovmError", "Povm", "validate_povm"]
