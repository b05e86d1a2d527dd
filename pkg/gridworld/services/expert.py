"""
gridworld/services/expert.py
============================
Expert demonstrations on the true map.

The expert knows the grid and the per-class arrival costs. It runs a full
backward shortest-path search from the goal with walls removed from the
graph and then, from the start, greedily takes the control with the lowest
``cost(f(x, u)) + cost_to_go(f(x, u))``. Ties go to the earliest control
(up, down, left, right). Each step records the lidar scan taken before
moving.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from planner.services.astar import PlanResult, cost_to_go
from sensor.services.lidar import PointCloud, SensorParams, scan

from .classes import FREE
from .dynamics import CONTROLS, AgentState, Control, neighbour, step
from .environment import SemanticGrid
from .exceptions import InvalidStateError

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemonstrationStep:
    """State, the control taken there, and the scan observed before moving."""

    state: AgentState
    control: Control
    scan: PointCloud


@dataclass(frozen=True)
class Demonstration:
    """One expert episode.

    Attributes:
        grid: The environment the episode ran in.
        start: Initial state.
        goal: Goal state.
        steps: One entry per control applied.
    """

    grid: SemanticGrid
    start: AgentState
    goal: AgentState
    steps: tuple[DemonstrationStep, ...]

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def grid_seed(self) -> int | None:
        return self.grid.seed

    def states(self) -> list[AgentState]:
        """Visited states, start and goal included."""
        return [s.state for s in self.steps] + [self.goal]

    def controls(self) -> list[Control]:
        return [s.control for s in self.steps]

    def replay(self) -> list[AgentState]:
        """States obtained by running the recorded controls through the dynamics."""
        states: list[AgentState] = [self.start]
        for recorded in self.steps:
            states.append(step(self.grid, states[-1], recorded.control))
        return states

    def is_consistent(self) -> bool:
        return self.replay() == self.states() and (not self.steps or self.steps[0].state == self.start)

    def path_cost(self) -> float:
        """Total expert arrival cost along the recorded path."""
        costs = self.grid.arrival_costs()
        return float(sum(costs[x.row, x.col] for x in self.states()[1:]))


@dataclass(frozen=True)
class InfeasibleDemonstration:
    """Explicit result for a start/goal pair with no connecting path."""

    start: AgentState
    goal: AgentState
    reason: str = "goal unreachable from start"


def _check_endpoint(grid: SemanticGrid, x: AgentState, name: str) -> AgentState:
    x = AgentState(int(x[0]), int(x[1]))
    if not grid.in_bounds(x):
        raise InvalidStateError(x, f"{name} outside the grid")
    if grid.class_at(x) != FREE:
        raise InvalidStateError(x, f"{name} is not a free cell")
    return x


def expert_controls(grid: SemanticGrid, start: AgentState, goal: AgentState, search: PlanResult) -> list[Control]:
    """Greedy controls along the cost-to-go of ``search`` from ``start`` to ``goal``."""
    costs = grid.arrival_costs()
    controls: list[Control] = []
    x: AgentState = start
    for _ in range(grid.height * grid.width):
        if x == goal:
            return controls
        best: Control | None = None
        best_value: float = math.inf
        for u in CONTROLS:
            nxt = neighbour(x, u)
            if not grid.is_traversable(nxt):
                continue
            value = costs[nxt.row, nxt.col] + search.g_at(nxt)
            if value < best_value:
                best, best_value = u, value
        if best is None:
            break
        controls.append(best)
        x = neighbour(x, best)
    raise InvalidStateError(start, "expert failed to reach the goal")


def generate_demonstration(
    grid: SemanticGrid,
    start: AgentState,
    goal: AgentState,
    sensor_params: SensorParams | None = None,
) -> Demonstration | InfeasibleDemonstration:
    """Produce the expert demonstration from ``start`` to ``goal``.

    Args:
        grid: True environment; its class set supplies the arrival costs.
        start: Free-class start cell.
        goal: Free-class goal cell.
        sensor_params: Lidar layout for the per-step scans.

    Returns:
        A :class:`Demonstration`, or an :class:`InfeasibleDemonstration` when
        no path joins the two cells.

    Raises:
        InvalidStateError: If start or goal is off the grid or not free.
    """
    start = _check_endpoint(grid, start, "start")
    goal = _check_endpoint(grid, goal, "goal")
    sensor_params = sensor_params or SensorParams()

    search: PlanResult = cost_to_go(goal, grid.arrival_costs(), blocked=grid.wall_mask())
    if not math.isfinite(search.g_at(start)):
        logger.debug("infeasible episode start=%s goal=%s", tuple(start), tuple(goal))
        return InfeasibleDemonstration(start=start, goal=goal)

    steps: list[DemonstrationStep] = []
    x: AgentState = start
    for u in expert_controls(grid, start, goal, search):
        steps.append(DemonstrationStep(state=x, control=u, scan=scan(grid, x, sensor_params)))
        x = step(grid, x, u)
    return Demonstration(grid=grid, start=start, goal=goal, steps=tuple(steps))
