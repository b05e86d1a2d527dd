"""
metrics/services/exceptions.py
==============================
Custom exception hierarchy for evaluation metrics.

Exception Tree::

    MetricsError (base)
    ├── LengthMismatchError
    └── EmptyTrajectoryError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class MetricsError(SemNavError):
    """Base exception for metric computation failures."""


class LengthMismatchError(MetricsError):
    """Raised when paired sequences have different lengths."""

    def __init__(self, what: str, left: int, right: int) -> None:
        super().__init__(
            message=f"{what}: {left} vs {right} items",
            details={"what": what, "left": left, "right": right},
        )


class EmptyTrajectoryError(MetricsError):
    """Raised when a distance is requested for a trajectory without states."""

    def __init__(self, which: str) -> None:
        super().__init__(message=f"{which} trajectory is empty", details={"which": which})
