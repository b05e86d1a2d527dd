"""
learner/services/tape.py
========================
Replay of a demonstration through the agent's pipeline.

For every expert step the recorder folds the scan into the map, computes
the cost field, plans from the expert's state and forms the Boltzmann
policy. Everything the backward pass needs is kept on an
:class:`EpisodeTape`; the map and the plan are immutable, and the cost
field owns its activation cache.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from costnet.services import CostField
from gridworld.services import AgentState, Control
from gridworld.services.expert import Demonstration
from planner.services import PlanResult, SearchTrace, boltzmann, manhattan_heuristic, plan
from policy_lab.services import GridMDP, bellman_soft, initial_table
from semantic_map.services import LogOddsMap

from .cost_strategy import CostStrategy
from .exceptions import LearnerError
from .loss import nll_loss

logger: logging.Logger = logging.getLogger(__name__)

PLANNERS: tuple[str, ...] = ("astar", "maxent")
MAXENT_GAMMA: float = 0.95


# ──────────────────────────────────────────────────────────────────────
# One planning step
# ──────────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class StepPlan:
    """Q-values and policy at the current state.

    Attributes:
        q: ``Q(x_t, u)`` per control.
        policy: Boltzmann distribution, all zeros when nothing reaches the goal.
        result: The A* search, ``None`` for the MaxEnt planner.
    """

    q: np.ndarray
    policy: np.ndarray
    result: PlanResult | None = None

    @property
    def reachable(self) -> bool:
        return bool(np.isfinite(self.q).any())


def maxent_q_values(
    cost_values: np.ndarray,
    x_t: AgentState,
    goal: AgentState,
    alpha: float,
    blocked: np.ndarray | None = None,
    gamma: float = MAXENT_GAMMA,
    sweeps: int | None = None,
) -> np.ndarray:
    """Soft-min value iteration over the whole grid, then Q at ``x_t``.

    Runs ``sweeps`` backups, one per cell by default.
    """
    mdp = GridMDP(
        costs=cost_values,
        goal=goal,
        blocked=np.zeros(cost_values.shape, dtype=bool) if blocked is None else blocked,
    )
    q: np.ndarray = initial_table(mdp)
    for _ in range(mdp.size if sweeps is None else sweeps):
        q = bellman_soft(q, mdp, gamma, alpha)
    return q[mdp.index(x_t)].copy()


def plan_step(
    cost_values: np.ndarray,
    x_t: AgentState,
    goal: AgentState,
    alpha: float,
    planner: str = "astar",
    blocked: np.ndarray | None = None,
    trace: SearchTrace | None = None,
    eps_weight: float = 1.0,
) -> StepPlan:
    """Plan from ``x_t`` and turn the Q-values into a policy.

    Raises:
        LearnerError: On an unknown planner name.
    """
    if planner == "astar":
        result = plan(
            x_t,
            goal,
            cost_values,
            heuristic=manhattan_heuristic(float(np.min(cost_values))),
            eps_weight=eps_weight,
            blocked=blocked,
            trace=trace,
        )
        q: np.ndarray = result.q_at_current
    elif planner == "maxent":
        result = None
        q = maxent_q_values(cost_values, x_t, goal, alpha, blocked)
    else:
        raise LearnerError(message=f"unknown planner {planner!r}", details={"planners": list(PLANNERS)})

    if not np.isfinite(q).any():
        return StepPlan(q=q, policy=np.zeros_like(q), result=result)
    return StepPlan(q=q, policy=boltzmann(q, alpha), result=result)


# ──────────────────────────────────────────────────────────────────────
# Episode tapes
# ──────────────────────────────────────────────────────────────────────


@dataclass(eq=False)
class StepRecord:
    """Everything computed at one expert step.

    Attributes:
        index: Step number within the episode.
        state: Expert state ``x_t``.
        control: Demonstrated control ``u*``.
        map_before: Map before this step's scan.
        map: Map after the scan.
        posterior: ``(K+1, H, W)`` class posterior of ``map``.
        cost_field: Costs, with the encoder cache while the tape is live.
        plan: A* search at ``x_t``; ``None`` under the MaxEnt planner.
        q: ``Q(x_t, u)``.
        policy: ``pi(u | x_t)``.
        loss: ``-log pi(u*)``, clamped.
        clamped: Whether the clamp was hit.
    """

    index: int
    state: AgentState
    control: Control
    map_before: LogOddsMap = field(repr=False)
    map: LogOddsMap = field(repr=False)
    posterior: np.ndarray = field(repr=False)
    cost_field: CostField = field(repr=False)
    plan: PlanResult | None = field(repr=False)
    q: np.ndarray
    policy: np.ndarray
    loss: float
    clamped: bool = False


@dataclass(eq=False)
class EpisodeTape:
    """Ordered step records of one demonstration."""

    demonstration: Demonstration
    steps: list[StepRecord]
    alpha: float
    planner: str = "astar"

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def loss(self) -> float:
        """Sum of the step losses."""
        return float(math.fsum(s.loss for s in self.steps))

    def policies(self) -> list[np.ndarray]:
        return [s.policy for s in self.steps]

    def controls(self) -> list[int]:
        return [int(s.control) for s in self.steps]

    @property
    def differentiable(self) -> bool:
        return all(s.plan is not None and s.cost_field.differentiable for s in self.steps)

    def release(self) -> None:
        """Drop every cost field's activation cache."""
        for s in self.steps:
            s.cost_field.release()


def record_episode(
    demonstration: Demonstration,
    strategy: CostStrategy,
    alpha: float,
    loss_clamp: float | None = 50.0,
    planner: str = "astar",
    keep_caches: bool = True,
) -> EpisodeTape:
    """Run the pipeline along the expert's states.

    Args:
        demonstration: Expert episode with its scans.
        strategy: Map encoder and cost source.
        alpha: Policy temperature.
        loss_clamp: Upper bound on one step's loss.
        planner: ``"astar"`` or ``"maxent"``.
        keep_caches: Keep the encoder activations for a later backward pass.

    Returns:
        The :class:`EpisodeTape`.
    """
    grid = demonstration.grid
    blocked = strategy.blocked(grid)
    log_map: LogOddsMap = strategy.new_map(grid.shape)
    records: list[StepRecord] = []
    for index, step in enumerate(demonstration.steps):
        before: LogOddsMap = log_map
        log_map = strategy.observe(log_map, step.state, step.scan)
        posterior, cost_field = strategy.cost_field(log_map, grid)
        step_plan: StepPlan = plan_step(cost_field.values, step.state, demonstration.goal, alpha, planner, blocked)
        loss: float = nll_loss(step_plan.policy, step.control, clamp=loss_clamp)
        clamped: bool = loss_clamp is not None and loss >= loss_clamp
        if clamped:
            logger.warning(
                "step %d at %s: demonstrated control %s has probability %.3g, loss clamped to %.1f",
                index,
                tuple(step.state),
                step.control.label,
                float(step_plan.policy[step.control]),
                loss,
            )
        if not keep_caches:
            cost_field.release()
        records.append(
            StepRecord(
                index=index,
                state=step.state,
                control=step.control,
                map_before=before,
                map=log_map,
                posterior=posterior,
                cost_field=cost_field,
                plan=step_plan.result,
                q=step_plan.q,
                policy=step_plan.policy,
                loss=loss,
                clamped=clamped,
            )
        )
    return EpisodeTape(demonstration=demonstration, steps=records, alpha=alpha, planner=planner)
