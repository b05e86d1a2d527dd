"""
gridworld/services/__init__.py
==============================
Service layer for the grid world.

Exports the environment core:
    - ClassSet, DEFAULT_CLASS_SET, expert_cost_of_arrival: Class labels and costs.
    - GridParams, SemanticGrid, generate_environment, grid_from_rows: Grids.
    - AgentState, Control, CONTROLS, step: Deterministic dynamics.
    - GridWorldError and subclasses: Custom exceptions.

The expert (``expert``), episode sampling (``episodes``) and persistence
(``dataset``) depend on the planner and sensor apps and are imported from
their own modules.
"""

from .classes import DEFAULT_CLASS_SET, FREE, ClassSet, expert_cost_of_arrival
from .dynamics import CONTROLS, AgentState, Control, control_between, neighbour, step
from .environment import GridParams, SemanticGrid, generate_environment, grid_from_rows
from .exceptions import (
    DatasetError,
    DatasetSchemaError,
    GridWorldError,
    ImageFormatError,
    InfeasibleEpisodeError,
    InvalidClassSetError,
    InvalidGridError,
    InvalidStateError,
    SchemaVersionError,
    UnknownClassError,
)

__all__: list[str] = [
    "ClassSet",
    "DEFAULT_CLASS_SET",
    "FREE",
    "expert_cost_of_arrival",
    "AgentState",
    "Control",
    "CONTROLS",
    "control_between",
    "neighbour",
    "step",
    "GridParams",
    "SemanticGrid",
    "generate_environment",
    "grid_from_rows",
    "GridWorldError",
    "InvalidClassSetError",
    "UnknownClassError",
    "InvalidGridError",
    "InvalidStateError",
    "InfeasibleEpisodeError",
    "ImageFormatError",
    "DatasetError",
    "DatasetSchemaError",
    "SchemaVersionError",
]
