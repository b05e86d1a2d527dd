"""
experiments/services/exceptions.py
==================================
Custom exception hierarchy for experiment commands.

Exception Tree::

    ExperimentError (base)
    └── ConfigurationError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class ExperimentError(SemNavError):
    """Base exception for command pipeline failures."""


class ConfigurationError(ExperimentError):
    """Raised for unreadable config files, unknown keys or bad values.

    Attributes:
        key: Dotted path of the offending entry, if any.
    """

    def __init__(self, problem: str, key: str | None = None) -> None:
        self.key: str | None = key
        where: str = f" at {key!r}" if key else ""
        super().__init__(message=f"invalid configuration{where}: {problem}", details={"key": key})
