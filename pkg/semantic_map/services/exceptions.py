"""
semantic_map/services/exceptions.py
===================================
Custom exception hierarchy for the map encoder.

Exception Tree::

    SemanticMapError (base)
    ├── InvalidPriorError
    └── SparsityMismatchError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class SemanticMapError(SemNavError):
    """Base exception for map encoder failures."""


class InvalidPriorError(SemanticMapError):
    """Raised when a prior has the wrong shape or a non-zero free component."""

    def __init__(self, problem: str) -> None:
        super().__init__(message=f"invalid log-odds prior: {problem}", details={"problem": problem})


class SparsityMismatchError(SemanticMapError):
    """Raised when an upstream gradient touches cells the map never updated.

    Attributes:
        cells: Flat indices of the offending cells.
    """

    def __init__(self, cells: list[int]) -> None:
        self.cells: list[int] = list(cells)
        super().__init__(
            message=f"upstream gradient on {len(self.cells)} cells outside the map's touched set",
            details={"cells": self.cells[:20]},
        )
