"""
policy_lab/services/value_iteration.py
======================================
Fixed-point iteration of the Bellman operators and policy extraction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from gridworld.services.dynamics import AgentState, Control, neighbour
from planner.services.policy import boltzmann

from .bellman import apply_operator, hard_values, initial_table, soft_values
from .exceptions import PolicyLabError
from .mdp import GridMDP

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(eq=False)
class QTable:
    """Result of :func:`value_iteration`.

    Attributes:
        q: ``(N, 4)`` state-control values, ``inf`` for invalid controls.
        operator: ``"hard"`` or ``"soft"``.
        gamma: Discount.
        alpha: Temperature of the soft operator and of the extracted policy.
        iterations: Sweeps performed.
        converged: Whether the last sweep moved less than the tolerance.
        deltas: Sup-norm change of every sweep.
    """

    q: np.ndarray
    mdp: GridMDP = field(repr=False)
    operator: str
    gamma: float
    alpha: float
    iterations: int
    converged: bool
    deltas: list[float] = field(default_factory=list, repr=False)

    def values(self) -> np.ndarray:
        """State values as a ``(height, width)`` array."""
        v = hard_values(self.q) if self.operator == "hard" else soft_values(self.q, self.alpha)
        v = v.copy()
        v[self.mdp.goal_index] = 0.0
        return v.reshape(self.mdp.shape)

    def q_at(self, x: tuple[int, int]) -> np.ndarray:
        return self.q[self.mdp.index(x)].copy()


def sup_norm_change(a: np.ndarray, b: np.ndarray) -> float:
    """Largest absolute difference, treating matching infinities as equal."""
    same = a == b
    with np.errstate(invalid="ignore"):
        diff = np.where(same, 0.0, np.abs(a - b))
    return float(diff.max()) if diff.size else 0.0


def value_iteration(
    operator: str,
    mdp: GridMDP,
    gamma: float = 0.95,
    alpha: float = 1.0,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    initial: np.ndarray | None = None,
) -> QTable:
    """Iterate ``operator`` from ``initial`` until the sup-norm change drops below ``tol``.

    Args:
        operator: ``"hard"`` or ``"soft"``.
        mdp: The grid MDP.
        gamma: Discount in ``[0, 1]``.
        alpha: Soft-min temperature.
        tol: Convergence threshold, positive.
        max_iters: Sweep budget; exhausting it returns ``converged=False``.
        initial: Starting table, zeros on valid controls by default.

    Raises:
        PolicyLabError: On a non-positive tolerance or an unknown operator.
    """
    if not tol > 0:
        raise PolicyLabError(message=f"tolerance must be positive, got {tol}", details={"tol": tol})
    q: np.ndarray = initial_table(mdp) if initial is None else np.array(initial, dtype=np.float64)
    deltas: list[float] = []
    converged: bool = False
    iterations: int = 0
    while iterations < max_iters:
        q_next = apply_operator(operator, q, mdp, gamma, alpha)
        iterations += 1
        delta = sup_norm_change(q, q_next)
        deltas.append(delta)
        q = q_next
        if delta < tol:
            converged = True
            break
    if converged:
        logger.info("%s value iteration converged in %d sweeps", operator, iterations)
    else:
        logger.warning("%s value iteration did not converge in %d sweeps (last change %.3e)", operator, iterations, deltas[-1] if deltas else float("nan"))
    return QTable(q=q, mdp=mdp, operator=operator, gamma=gamma, alpha=alpha, iterations=iterations, converged=converged, deltas=deltas)


def extract_policy(table: QTable) -> np.ndarray:
    """``(N, 4)`` Boltzmann policy ``pi(u|x) ~ exp(-Q(x, u) / alpha)``; rows without controls are 0."""
    policy: np.ndarray = np.zeros_like(table.q)
    for index, row in enumerate(table.q):
        if np.isfinite(row).any():
            policy[index] = boltzmann(row, table.alpha)
    return policy


@dataclass(frozen=True)
class GreedyPath:
    states: list[AgentState]
    reached: bool


def greedy_rollout(table: QTable, start: AgentState, max_steps: int | None = None) -> GreedyPath:
    """Follow ``argmax pi`` (first control on ties) from ``start``."""
    mdp: GridMDP = table.mdp
    max_steps = mdp.size if max_steps is None else max_steps
    x: AgentState = AgentState(*start)
    states: list[AgentState] = [x]
    for _ in range(max_steps):
        if x == mdp.goal:
            break
        row = table.q[mdp.index(x)]
        if not np.isfinite(row).any():
            break
        x = neighbour(x, Control(int(np.argmin(row))))
        states.append(x)
    return GreedyPath(states=states, reached=x == mdp.goal)
