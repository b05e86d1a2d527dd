"""
planner/services/subgradient.py
===============================
Visitation counts of an optimal trajectory.

``Q(x_t, u)`` is the minimum over trajectories of ``<c, mu_tau>``, so the
visitation counts of the minimising trajectory are a subgradient of Q with
respect to the cost field. The trajectory is read off the planner's child
pointers.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from gridworld.services.dynamics import AgentState, Control, control_between, neighbour

from .astar import PlanResult
from .exceptions import InfiniteCostToGoError, PlannerError


@dataclass
class Visitation:
    """Sparse state-control visitation counts ``mu``."""

    counts: Counter = field(default_factory=Counter)

    def __getitem__(self, key: tuple[AgentState, Control]) -> int:
        return self.counts[key]

    def __len__(self) -> int:
        return len(self.counts)

    def items(self):
        return self.counts.items()

    def add(self, x: AgentState, u: Control, count: int = 1) -> None:
        self.counts[(x, u)] += count

    def arrival_counts(self) -> Counter:
        """How often each cell is arrived at; the gradient of Q on a per-cell cost field."""
        cells: Counter = Counter()
        for (x, u), count in self.counts.items():
            cells[neighbour(x, u)] += count
        return cells

    def inner_product(self, cost_field: np.ndarray) -> float:
        """``<c, mu>`` with ``c(x, u) = cost_field[f(x, u)]``."""
        return float(sum(count * cost_field[cell.row, cell.col] for cell, count in self.arrival_counts().items()))

    def cell_gradient(self, shape: tuple[int, int], coefficient: float = 1.0) -> sparse.coo_matrix:
        """Arrival counts scaled by ``coefficient`` as a sparse ``shape`` matrix."""
        cells = self.arrival_counts()
        rows = np.fromiter((cell.row for cell in cells), dtype=np.int64, count=len(cells))
        cols = np.fromiter((cell.col for cell in cells), dtype=np.int64, count=len(cells))
        data = np.fromiter((coefficient * count for count in cells.values()), dtype=np.float64, count=len(cells))
        return sparse.coo_matrix((data, (rows, cols)), shape=shape)


def subgradient(result: PlanResult, x_t: AgentState, u: Control, cost_field: np.ndarray | None = None) -> Visitation:
    """Trace the optimal trajectory that starts with ``u`` at ``x_t``.

    Args:
        result: Plan whose child pointers define the trajectory.
        x_t: State the control is taken from.
        u: First control of the trajectory.
        cost_field: Costs to check the trajectory against, defaults to the
            plan's own field.

    Returns:
        The :class:`Visitation` of ``(x_t, u)`` followed by the child chain
        from ``f(x_t, u)`` to the goal.

    Raises:
        InfiniteCostToGoError: If ``Q(x_t, u)`` is infinite.
    """
    x_t = AgentState(*x_t)
    u = Control(u)
    q: np.ndarray = result.q_values_at(x_t)
    if not math.isfinite(q[u]):
        raise InfiniteCostToGoError(x_t, u.label)

    mu = Visitation()
    mu.add(x_t, u)
    cursor: AgentState = neighbour(x_t, u)
    for _ in range(result.g.size):
        if cursor == result.goal:
            break
        nxt = result.child_of(cursor)
        if nxt is None:
            raise PlannerError(
                message=f"broken child chain at {tuple(cursor)}",
                details={"state": list(cursor)},
            )
        mu.add(cursor, control_between(cursor, nxt))
        cursor = nxt
    else:
        raise PlannerError(message="child chain does not terminate", details={"state": list(x_t)})

    if cost_field is not None and not math.isclose(
        mu.inner_product(np.asarray(cost_field)), q[u], rel_tol=1e-9, abs_tol=1e-9
    ):
        raise PlannerError(
            message="visitation does not reproduce Q under the given cost field",
            details={"state": list(x_t), "control": u.label},
        )
    return mu
