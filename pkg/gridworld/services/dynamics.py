"""
gridworld/services/dynamics.py
==============================
Agent state, the four controls and the deterministic transition.
"""

from __future__ import annotations

from enum import IntEnum
from typing import TYPE_CHECKING, NamedTuple

from .exceptions import InvalidStateError

if TYPE_CHECKING:
    from .environment import SemanticGrid


class AgentState(NamedTuple):
    """Integer cell coordinates of the agent."""

    row: int
    col: int


class Control(IntEnum):
    """Motion primitives. Declaration order is the tie-break order."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]

    @property
    def label(self) -> str:
        return self.name.lower()


_DELTAS: dict[Control, tuple[int, int]] = {
    Control.UP: (-1, 0),
    Control.DOWN: (1, 0),
    Control.LEFT: (0, -1),
    Control.RIGHT: (0, 1),
}

CONTROLS: tuple[Control, ...] = tuple(Control)


def neighbour(x: AgentState, u: Control) -> AgentState:
    """Return the cell one move away, ignoring bounds and walls."""
    d_row, d_col = u.delta
    return AgentState(x.row + d_row, x.col + d_col)


def step(grid: "SemanticGrid", x: AgentState, u: Control) -> AgentState:
    """Apply ``u`` at ``x``; moves off the grid or into a wall leave ``x`` unchanged."""
    target: AgentState = neighbour(x, u)
    if not grid.is_traversable(target):
        return x
    return target


def control_between(x: AgentState, y: AgentState) -> Control:
    """Return the control that moves ``x`` onto the 4-adjacent cell ``y``.

    Raises:
        InvalidStateError: If the cells are not 4-adjacent.
    """
    delta: tuple[int, int] = (y.row - x.row, y.col - x.col)
    for control, control_delta in _DELTAS.items():
        if control_delta == delta:
            return control
    raise InvalidStateError(tuple(y), f"not 4-adjacent to {tuple(x)}")
