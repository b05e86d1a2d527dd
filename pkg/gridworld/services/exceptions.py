"""
gridworld/services/exceptions.py
================================
Custom exception hierarchy for the grid world.

Exception Tree::

    GridWorldError (base)
    ├── InvalidClassSetError
    ├── UnknownClassError
    ├── InvalidGridError
    ├── InvalidStateError
    ├── InfeasibleEpisodeError
    ├── ImageFormatError
    └── DatasetError
        ├── DatasetSchemaError
        └── SchemaVersionError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class GridWorldError(SemNavError):
    """Base exception for all grid world errors."""


class InvalidClassSetError(GridWorldError):
    """Raised when class labels, costs and colours do not form a usable class set."""

    def __init__(self, problem: str, labels: tuple[str, ...] = ()) -> None:
        super().__init__(
            message=f"invalid class set: {problem}",
            details={"problem": problem, "labels": list(labels)},
        )


class UnknownClassError(GridWorldError):
    """Raised when a class index or label is not part of the class set.

    Attributes:
        value: The rejected index or label.
    """

    def __init__(self, value: int | str, count: int) -> None:
        self.value: int | str = value
        super().__init__(
            message=f"unknown class {value!r} for {count} classes",
            details={"value": value, "count": count},
        )


class InvalidGridError(GridWorldError):
    """Raised when generation parameters describe a degenerate grid.

    Attributes:
        parameter: Name of the offending parameter.
        value: The rejected value.
    """

    def __init__(self, parameter: str, value: object) -> None:
        self.parameter: str = parameter
        self.value: object = value
        super().__init__(
            message=f"invalid grid parameter {parameter}={value!r}",
            details={"parameter": parameter, "value": repr(value)},
        )


class InvalidStateError(GridWorldError):
    """Raised when a state is out of bounds or on the wrong class of cell."""

    def __init__(self, state: tuple[int, int], reason: str) -> None:
        self.state: tuple[int, int] = tuple(state)
        self.reason: str = reason
        super().__init__(
            message=f"invalid state {self.state}: {reason}",
            details={"state": list(self.state), "reason": reason},
        )


class InfeasibleEpisodeError(GridWorldError):
    """Raised when an episode is required but no path joins start and goal."""

    def __init__(self, start: tuple[int, int], goal: tuple[int, int]) -> None:
        super().__init__(
            message=f"no feasible path from {tuple(start)} to {tuple(goal)}",
            details={"start": list(start), "goal": list(goal)},
        )


class ImageFormatError(GridWorldError):
    """Raised when an image array or PPM file does not have the expected layout."""

    def __init__(self, what: str, problem: str) -> None:
        super().__init__(message=f"{what}: {problem}", details={"what": what, "problem": problem})


class DatasetError(GridWorldError):
    """Base exception for dataset persistence failures."""


class DatasetSchemaError(DatasetError):
    """Raised when a dataset file is unreadable, truncated or malformed."""

    def __init__(self, path: str, problem: str) -> None:
        self.path: str = str(path)
        super().__init__(
            message=f"dataset {self.path} is malformed: {problem}",
            details={"path": self.path, "problem": problem},
        )


class SchemaVersionError(DatasetError):
    """Raised when a dataset file declares an unsupported schema version."""

    def __init__(self, path: str, found: object, expected: int) -> None:
        super().__init__(
            message=f"dataset {path} has schema version {found!r}, expected {expected}",
            details={"path": str(path), "found": repr(found), "expected": expected},
        )
