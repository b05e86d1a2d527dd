"""
learner/services/rollout.py
===========================
Closed-loop navigation with a cost strategy.

At every step the agent scans, updates its map, recomputes the costs,
plans and takes the most likely control (ties to the earliest control). A
rollout ends at the goal, when the step cap is exceeded, or as soon as the
goal cannot be reached under the current costs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from gridworld.services import AgentState, Control, SemanticGrid, step
from planner.services import greedy_control
from semantic_map.services import LogOddsMap
from sensor.services import SensorParams, scan

from .cost_strategy import CostStrategy
from .tape import plan_step

logger: logging.Logger = logging.getLogger(__name__)

REACHED: str = "reached"
STEP_CAP: str = "step_cap"
UNREACHABLE: str = "unreachable"


@dataclass(eq=False)
class RolloutResult:
    """Trajectory of one closed-loop episode.

    Attributes:
        states: Visited states, start included.
        controls: Controls applied.
        reached: Whether the last state is the goal.
        reason: ``"reached"``, ``"step_cap"`` or ``"unreachable"``.
        final_map: The agent's map at the end.
        policies: Policy used at each step.
    """

    states: list[AgentState]
    controls: list[Control]
    reached: bool
    reason: str
    final_map: LogOddsMap | None = field(default=None, repr=False)
    policies: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def steps(self) -> int:
        return len(self.controls)

    def path_cost(self, grid: SemanticGrid) -> float:
        """Expert arrival cost of the visited states after the start."""
        costs = grid.arrival_costs()
        return float(sum(costs[x.row, x.col] for x in self.states[1:]))


def rollout(
    grid: SemanticGrid,
    start: AgentState,
    goal: AgentState,
    strategy: CostStrategy,
    step_cap: int,
    sensor_params: SensorParams | None = None,
    alpha: float = 1.0,
    planner: str = "astar",
) -> RolloutResult:
    """Drive the agent from ``start`` towards ``goal``.

    Args:
        grid: True environment.
        start: Initial state.
        goal: Goal state.
        strategy: Map encoder and cost source.
        step_cap: Most controls the agent may apply; twice the expert's
            length in evaluation.
        sensor_params: Lidar layout.
        alpha: Policy temperature (the greedy control does not depend on it).
        planner: ``"astar"`` or ``"maxent"``.

    Returns:
        A :class:`RolloutResult`; failures are reported through ``reason``.
    """
    sensor_params = sensor_params or SensorParams()
    x: AgentState = AgentState(*start)
    goal = AgentState(*goal)
    blocked = strategy.blocked(grid)
    log_map: LogOddsMap = strategy.new_map(grid.shape)
    states: list[AgentState] = [x]
    controls: list[Control] = []
    policies: list[np.ndarray] = []

    while x != goal:
        if len(controls) >= step_cap:
            logger.debug("rollout hit the step cap %d at %s", step_cap, tuple(x))
            return RolloutResult(states, controls, False, STEP_CAP, log_map, policies)
        log_map = strategy.observe(log_map, x, scan(grid, x, sensor_params))
        _, cost_field = strategy.cost_field(log_map, grid)
        step_plan = plan_step(cost_field.values, x, goal, alpha, planner, blocked)
        cost_field.release()
        if not step_plan.reachable:
            logger.debug("goal %s unreachable from %s", tuple(goal), tuple(x))
            return RolloutResult(states, controls, False, UNREACHABLE, log_map, policies)
        u = Control(greedy_control(step_plan.policy))
        policies.append(step_plan.policy)
        controls.append(u)
        x = step(grid, x, u)
        states.append(x)

    return RolloutResult(states, controls, True, REACHED, log_map, policies)
