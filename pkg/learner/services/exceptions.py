"""
learner/services/exceptions.py
==============================
Custom exception hierarchy for training and rollouts.

Exception Tree::

    LearnerError (base)
    ├── NonFiniteIntermediateError
    └── EmptyDatasetError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class LearnerError(SemNavError):
    """Base exception for learner failures, including invalid training settings."""


class NonFiniteIntermediateError(LearnerError):
    """Raised when a loss, coefficient or gradient stops being finite.

    Attributes:
        stage: Where in the chain the value broke (``"loss"``, ``"cost"``, ...).
        step: Index of the episode step being differentiated.
    """

    def __init__(self, stage: str, step: int, **details: object) -> None:
        self.stage: str = stage
        self.step: int = step
        super().__init__(
            message=f"non-finite {stage} at step {step}",
            details={"stage": stage, "step": step, **details},
        )


class EmptyDatasetError(LearnerError):
    """Raised when training is asked to run on a dataset with no episodes."""

    def __init__(self, split: str | None = None) -> None:
        super().__init__(
            message=f"dataset split {split!r} has no episodes" if split else "dataset has no episodes",
            details={"split": split},
        )
