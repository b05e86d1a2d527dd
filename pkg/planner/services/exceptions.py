"""
planner/services/exceptions.py
==============================
Custom exception hierarchy for planning and policy extraction.

Exception Tree::

    PlannerError (base)
    ├── InvalidPlanningInputError
    ├── UnreachableGoalError
    └── InfiniteCostToGoError
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class PlannerError(SemNavError):
    """Base exception for planner failures."""


class InvalidPlanningInputError(PlannerError):
    """Raised for negative or non-finite costs, bad states or bad temperatures."""

    def __init__(self, problem: str, **details: object) -> None:
        super().__init__(message=f"invalid planning input: {problem}", details=dict(details))


class UnreachableGoalError(PlannerError):
    """Raised when a policy is requested but every control has infinite cost-to-go."""

    def __init__(self, state: tuple[int, int] | None = None) -> None:
        where: str = f" from {tuple(state)}" if state is not None else ""
        super().__init__(
            message=f"goal is unreachable{where}",
            details={"state": list(state) if state is not None else None},
        )


class InfiniteCostToGoError(PlannerError):
    """Raised when a control's cost-to-go is infinite or was never settled by the search."""

    def __init__(self, state: tuple[int, int], control: str, reason: str = "has infinite cost-to-go") -> None:
        super().__init__(
            message=f"control {control} at {tuple(state)} {reason}",
            details={"state": list(state), "control": control, "reason": reason},
        )
