"""
policy_lab/services/mdp.py
==========================
Deterministic grid MDP shared by both Bellman operators.

States are all cells in row-major order. Moving off the grid or into a
blocked cell is not a control of that state (its Q is ``inf``), the same
graph the planner searches. The goal is absorbing with zero value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gridworld.services.dynamics import CONTROLS, AgentState, neighbour
from gridworld.services.environment import SemanticGrid

from .exceptions import PolicyLabError


@dataclass(frozen=True, eq=False)
class GridMDP:
    """Transition and cost tables of a grid.

    Attributes:
        costs: ``(height, width)`` arrival cost per cell.
        goal: Absorbing goal state.
        blocked: Cells removed from the graph.
        successor: ``(N, 4)`` flat successor index, ``-1`` for invalid controls.
        step_cost: ``(N, 4)`` arrival cost of each control, ``inf`` if invalid.
    """

    costs: np.ndarray
    goal: AgentState
    blocked: np.ndarray
    successor: np.ndarray = field(init=False, repr=False)
    step_cost: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        costs = np.asarray(self.costs, dtype=np.float64)
        blocked = np.asarray(self.blocked, dtype=bool)
        if costs.ndim != 2 or blocked.shape != costs.shape:
            raise PolicyLabError(message="cost and blocked arrays must share a 2D shape", details={})
        if np.any(costs < 0) or not np.all(np.isfinite(costs)):
            raise PolicyLabError(message="costs must be finite and non-negative", details={})
        goal = AgentState(int(self.goal[0]), int(self.goal[1]))
        height, width = costs.shape
        if not (0 <= goal.row < height and 0 <= goal.col < width) or blocked[goal.row, goal.col]:
            raise PolicyLabError(message=f"goal {tuple(goal)} is not a valid state", details={"goal": list(goal)})

        successor = np.full((height * width, len(CONTROLS)), -1, dtype=np.int64)
        step_cost = np.full((height * width, len(CONTROLS)), np.inf)
        for row in range(height):
            for col in range(width):
                if blocked[row, col]:
                    continue
                for u in CONTROLS:
                    nxt = neighbour(AgentState(row, col), u)
                    if 0 <= nxt.row < height and 0 <= nxt.col < width and not blocked[nxt.row, nxt.col]:
                        successor[row * width + col, u] = nxt.row * width + nxt.col
                        step_cost[row * width + col, u] = costs[nxt.row, nxt.col]
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "blocked", blocked)
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "successor", successor)
        object.__setattr__(self, "step_cost", step_cost)

    @classmethod
    def from_grid(cls, grid: SemanticGrid, goal: AgentState, costs: np.ndarray | None = None) -> "GridMDP":
        """MDP over a semantic grid; walls are blocked, costs default to the expert's."""
        return cls(costs=grid.arrival_costs() if costs is None else costs, goal=goal, blocked=grid.wall_mask())

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.costs.shape)  # type: ignore[return-value]

    @property
    def size(self) -> int:
        return int(self.costs.size)

    @property
    def goal_index(self) -> int:
        return self.goal.row * self.shape[1] + self.goal.col

    @property
    def valid(self) -> np.ndarray:
        """``(N, 4)`` mask of controls that exist."""
        return self.successor >= 0

    def index(self, x: tuple[int, int]) -> int:
        return int(x[0]) * self.shape[1] + int(x[1])

    def state_of(self, index: int) -> AgentState:
        return AgentState(index // self.shape[1], index % self.shape[1])


def bordered_grid_mdp(size: int, costs: float = 1.0) -> tuple[GridMDP, AgentState]:
    """Empty ``size x size`` room walled on its outer ring.

    Returns:
        The MDP with the goal in the bottom-right interior corner, and the
        top-left interior corner as start.
    """
    if size < 4:
        raise PolicyLabError(message=f"grid size must be at least 4, got {size}", details={"size": size})
    blocked = np.zeros((size, size), dtype=bool)
    blocked[0, :] = blocked[-1, :] = True
    blocked[:, 0] = blocked[:, -1] = True
    mdp = GridMDP(costs=np.full((size, size), costs), goal=AgentState(size - 2, size - 2), blocked=blocked)
    return mdp, AgentState(1, 1)
