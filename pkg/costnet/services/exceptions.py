"""
costnet/services/exceptions.py
==============================
Custom exception hierarchy for the cost encoder.

Exception Tree::

    CostNetError (base)
    ├── ShapeMismatchError
    ├── InvalidSettingError
    ├── BackwardBeforeForwardError
    ├── NonFiniteGradientError
    └── CheckpointError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class CostNetError(SemNavError):
    """Base exception for cost encoder failures."""


class ShapeMismatchError(CostNetError):
    """Raised when an input or gradient has the wrong shape."""

    def __init__(self, what: str, expected: object, got: object) -> None:
        super().__init__(
            message=f"{what}: expected shape {expected}, got {got}",
            details={"what": what, "expected": repr(expected), "got": repr(got)},
        )


class InvalidSettingError(CostNetError):
    """Raised when a layer or optimizer setting is outside its valid range.

    Attributes:
        setting: Name of the offending setting.
        value: The rejected value.
    """

    def __init__(self, setting: str, value: object, problem: str) -> None:
        self.setting: str = setting
        self.value: object = value
        super().__init__(
            message=f"{setting}={value!r}: {problem}",
            details={"setting": setting, "value": repr(value), "problem": problem},
        )


class BackwardBeforeForwardError(CostNetError):
    """Raised when backward is called on a cost field without a forward cache."""

    def __init__(self) -> None:
        super().__init__(message="backward called before forward (no cached activations)", details={})


class NonFiniteGradientError(CostNetError):
    """Raised when an optimizer step receives NaN or infinite gradients.

    Attributes:
        name: Parameter whose gradient is not finite.
    """

    def __init__(self, name: str) -> None:
        self.name: str = name
        super().__init__(message=f"non-finite gradient for parameter {name!r}", details={"parameter": name})


class CheckpointError(CostNetError):
    """Raised when a checkpoint cannot be written, read or understood."""

    def __init__(self, path: str, problem: str) -> None:
        super().__init__(message=f"checkpoint {path}: {problem}", details={"path": str(path), "problem": problem})
