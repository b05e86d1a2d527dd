"""
planner/services/__init__.py
============================
Service layer for shortest-path planning.

Exports:
    - plan, cost_to_go: Backward A* and its exhaustive (Dijkstra) mode.
    - PlanResult, SearchTrace: Search outcome and optional expansion log.
    - zero_heuristic, manhattan_heuristic: Admissible heuristics.
    - boltzmann, log_boltzmann, greedy_control: Policy extraction.
    - subgradient, Visitation: Visitation-count subgradient of Q.
    - PlannerError and subclasses: Custom exceptions.
"""

from .astar import (
    Heuristic,
    PlanResult,
    SearchTrace,
    control_toward,
    cost_to_go,
    manhattan_heuristic,
    plan,
    zero_heuristic,
)
from .exceptions import (
    InfiniteCostToGoError,
    InvalidPlanningInputError,
    PlannerError,
    UnreachableGoalError,
)
from .policy import boltzmann, greedy_control, log_boltzmann
from .subgradient import Visitation, subgradient

__all__: list[str] = [
    "Heuristic",
    "PlanResult",
    "SearchTrace",
    "control_toward",
    "cost_to_go",
    "manhattan_heuristic",
    "plan",
    "zero_heuristic",
    "boltzmann",
    "greedy_control",
    "log_boltzmann",
    "subgradient",
    "Visitation",
    "PlannerError",
    "InvalidPlanningInputError",
    "UnreachableGoalError",
    "InfiniteCostToGoError",
]
