"""Exception hierarchy shared by all qslab modules.

Input problems (bad ids, malformed files, parameter範 violations) raise
InputError; the CLI maps these to exit code 1.  Failures that only show up
while computing (unreachable pairs, impossible calibrations, separation
failures) raise ComputationError; the CLI maps these to exit code 2.
"""
from __future__ import annotations


class QslabError(Exception):
    """Base class for all qslab errors."""


class InputError(QslabError):
    """Invalid arguments, ids, files or parameter combinations."""


class ValidationError(InputError):
    """A constructed object violates its invariants (e.g. metric axioms)."""


class ComputationError(QslabError):
    """A well-posed request that cannot be completed on this sample."""


class UnreachablePairError(ComputationError):
    """No chain exists between the requested endpoints at this scale."""


class CalibrationError(ComputationError):
    """A measure-calibrated ball or cover cannot be realized (atoms, caps)."""
