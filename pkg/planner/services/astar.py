"""
planner/services/astar.py
=========================
Backward A* over a per-cell arrival-cost field.

The search runs from the goal over predecessors, so every closed state ends
up with its exact cost-to-go ``g`` and a child pointer to the next state on
one optimal path. The edge ``x -> f(x, u)`` costs ``cost_field[f(x, u)]``
(the cost of arriving at the successor). Moves out of the grid or into a
blocked cell are not edges; bumping into a wall never lies on a finite
shortest path, so self-loops are left out of the graph.

When a current state ``x_t`` is given, the search stops as soon as every
valid successor of ``x_t`` is closed, which is all a Boltzmann policy at
``x_t`` needs. Without ``x_t`` it runs to exhaustion (plain Dijkstra), which
is what the expert and the cost-to-go oracles use.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from gridworld.services.dynamics import CONTROLS, AgentState, Control, neighbour

from .exceptions import InfiniteCostToGoError, InvalidPlanningInputError, PlannerError

logger: logging.Logger = logging.getLogger(__name__)

Heuristic = Callable[[AgentState, AgentState], float]
"""``heuristic(x_t, x)``: lower bound on the cost of reaching ``x`` from ``x_t``."""


def zero_heuristic(x_t: AgentState, x: AgentState) -> float:
    return 0.0


def manhattan_heuristic(min_cost: float) -> Heuristic:
    """Manhattan distance scaled by the smallest arrival cost.

    Admissible and consistent for the backward search because every move
    costs at least ``min_cost``.
    """
    if min_cost < 0:
        raise InvalidPlanningInputError("heuristic scale must be non-negative", min_cost=min_cost)

    def heuristic(x_t: AgentState, x: AgentState) -> float:
        return min_cost * (abs(x_t.row - x.row) + abs(x_t.col - x.col))

    return heuristic


@dataclass
class SearchTrace:
    """Expansion log of one search, filled in by :func:`plan` when passed in."""

    expansions: list[AgentState] = field(default_factory=list)
    g_values: list[float] = field(default_factory=list)

    def record(self, state: AgentState, g: float) -> None:
        self.expansions.append(state)
        self.g_values.append(g)

    def to_dict(self) -> dict:
        return {
            "expansion_order": [[s.row, s.col] for s in self.expansions],
            "g_values": self.g_values,
        }


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Outcome of one backward search.

    Attributes:
        shape: ``(height, width)`` of the cost field.
        goal: The goal state.
        current: The state the search was run for, ``None`` for a full search.
        g: Flat cost-to-go per state, ``inf`` where not closed.
        child: Flat index of the successor on the optimal path, ``-1`` if none.
        closed: Flat mask of states whose ``g`` is exact.
        q_at_current: ``Q(x_t, u)`` for the four controls, ``inf`` for invalid
            or unreachable controls. All ``inf`` for a full search.
        cost_field: The arrival costs the search used.
        blocked: Cells removed from the graph.
        expansions: Number of states expanded.
    """

    shape: tuple[int, int]
    goal: AgentState
    current: AgentState | None
    g: np.ndarray
    child: np.ndarray
    closed: np.ndarray
    q_at_current: np.ndarray
    cost_field: np.ndarray
    blocked: np.ndarray
    expansions: int

    @property
    def reachable(self) -> bool:
        """True when at least one control at the current state reaches the goal."""
        return bool(np.isfinite(self.q_at_current).any())

    def index(self, x: AgentState) -> int:
        return x.row * self.shape[1] + x.col

    def state_of(self, index: int) -> AgentState:
        return AgentState(index // self.shape[1], index % self.shape[1])

    def is_valid(self, x: AgentState) -> bool:
        return 0 <= x.row < self.shape[0] and 0 <= x.col < self.shape[1] and not self.blocked[x.row, x.col]

    def is_closed(self, x: AgentState) -> bool:
        return self.is_valid(x) and bool(self.closed[self.index(x)])

    def g_at(self, x: AgentState) -> float:
        if not self.is_valid(x):
            return math.inf
        return float(self.g[self.index(x)])

    def child_of(self, x: AgentState) -> AgentState | None:
        target: int = int(self.child[self.index(x)])
        return None if target < 0 else self.state_of(target)

    def q_values_at(self, x: AgentState) -> np.ndarray:
        """``Q(x, u) = c(f(x, u)) + g(f(x, u))`` for any state whose successors are settled.

        Raises:
            InfiniteCostToGoError: If a valid successor of ``x`` is still open.
        """
        q: np.ndarray = np.full(len(CONTROLS), math.inf)
        for u in CONTROLS:
            nxt: AgentState = neighbour(x, u)
            if not self.is_valid(nxt):
                continue
            if not self.closed[self.index(nxt)]:
                if self.current is None:
                    continue
                raise InfiniteCostToGoError(tuple(x), u.label, f"leads to {tuple(nxt)}, which the search left open")
            q[u] = self.cost_field[nxt.row, nxt.col] + self.g[self.index(nxt)]
        return q

    def path_from(self, x: AgentState) -> list[AgentState]:
        """Follow child pointers from ``x`` to the goal, both ends included.

        Raises:
            PlannerError: If ``x`` is not closed.
        """
        if not self.is_closed(x):
            raise PlannerError(
                message=f"{tuple(x)} has no settled path to the goal",
                details={"state": list(x)},
            )
        path: list[AgentState] = [x]
        cursor: AgentState = x
        for _ in range(self.g.size):
            if cursor == self.goal:
                return path
            nxt = self.child_of(cursor)
            if nxt is None:
                break
            path.append(nxt)
            cursor = nxt
        raise PlannerError(
            message=f"child pointers from {tuple(x)} do not reach the goal",
            details={"state": list(x)},
        )


def _validate(cost_field: np.ndarray, blocked: np.ndarray, goal: AgentState, x_t: AgentState | None) -> None:
    if cost_field.ndim != 2:
        raise InvalidPlanningInputError("cost field must be two-dimensional", ndim=cost_field.ndim)
    if not np.all(np.isfinite(cost_field)) or np.any(cost_field < 0):
        raise InvalidPlanningInputError("cost field must be finite and non-negative")
    if blocked.shape != cost_field.shape:
        raise InvalidPlanningInputError("blocked mask shape differs from cost field", shape=list(blocked.shape))
    height, width = cost_field.shape
    for name, state in (("goal", goal), ("current", x_t)):
        if state is None:
            continue
        if not (0 <= state.row < height and 0 <= state.col < width):
            raise InvalidPlanningInputError(f"{name} state outside the grid", state=list(state))
        if blocked[state.row, state.col]:
            raise InvalidPlanningInputError(f"{name} state is blocked", state=list(state))


def plan(
    x_t: AgentState | None,
    x_g: AgentState,
    cost_field: np.ndarray,
    heuristic: Heuristic = zero_heuristic,
    eps_weight: float = 1.0,
    blocked: np.ndarray | None = None,
    trace: SearchTrace | None = None,
) -> PlanResult:
    """Backward A* from ``x_g`` until every successor of ``x_t`` is closed.

    Args:
        x_t: Current state, or ``None`` to search the whole graph.
        x_g: Goal state.
        cost_field: ``(height, width)`` non-negative arrival costs.
        heuristic: Lower bound on the cost from ``x_t`` to a state.
        eps_weight: Heuristic inflation; 1 keeps the search exact.
        blocked: Optional mask of cells removed from the graph.
        trace: Optional :class:`SearchTrace` to fill in.

    Returns:
        A :class:`PlanResult`. Controls that leave the grid, enter a blocked
        cell or cannot reach the goal have ``Q = inf``.

    Raises:
        InvalidPlanningInputError: On negative or non-finite costs, or when a
            state is outside the grid or blocked.
    """
    cost_field = np.asarray(cost_field, dtype=np.float64)
    blocked = np.zeros(cost_field.shape, dtype=bool) if blocked is None else np.asarray(blocked, dtype=bool)
    x_g = AgentState(*x_g)
    x_t = None if x_t is None else AgentState(*x_t)
    _validate(cost_field, blocked, x_g, x_t)
    if eps_weight < 1.0:
        raise InvalidPlanningInputError("eps_weight must be at least 1", eps_weight=eps_weight)

    height, width = cost_field.shape
    size: int = height * width
    g: np.ndarray = np.full(size, math.inf)
    child: np.ndarray = np.full(size, -1, dtype=np.int64)
    closed: np.ndarray = np.zeros(size, dtype=bool)

    pending: set[int] = set()
    if x_t is not None:
        for u in CONTROLS:
            nxt = neighbour(x_t, u)
            if 0 <= nxt.row < height and 0 <= nxt.col < width and not blocked[nxt.row, nxt.col]:
                pending.add(nxt.row * width + nxt.col)

    def priority(state: AgentState, g_value: float) -> float:
        if x_t is None:
            return g_value
        return g_value + eps_weight * heuristic(x_t, state)

    goal_index: int = x_g.row * width + x_g.col
    g[goal_index] = 0.0
    open_heap: list[tuple[float, float, int]] = [(priority(x_g, 0.0), 0.0, goal_index)]
    expansions: int = 0

    while open_heap and (x_t is None or pending):
        _, g_value, index = heapq.heappop(open_heap)
        if closed[index] or g_value > g[index]:
            continue
        closed[index] = True
        expansions += 1
        pending.discard(index)
        state = AgentState(index // width, index % width)
        if trace is not None:
            trace.record(state, g_value)

        arrival: float = float(cost_field[state.row, state.col])
        for u in CONTROLS:
            # predecessor p with f(p, u) = state
            d_row, d_col = u.delta
            p_row, p_col = state.row - d_row, state.col - d_col
            if not (0 <= p_row < height and 0 <= p_col < width) or blocked[p_row, p_col]:
                continue
            p_index: int = p_row * width + p_col
            if closed[p_index]:
                continue
            candidate: float = g_value + arrival
            if g[p_index] > candidate:
                g[p_index] = candidate
                child[p_index] = index
                heapq.heappush(open_heap, (priority(AgentState(p_row, p_col), candidate), candidate, p_index))

    q: np.ndarray = np.full(len(CONTROLS), math.inf)
    if x_t is not None:
        for u in CONTROLS:
            nxt = neighbour(x_t, u)
            if 0 <= nxt.row < height and 0 <= nxt.col < width and not blocked[nxt.row, nxt.col]:
                nxt_index = nxt.row * width + nxt.col
                if closed[nxt_index]:
                    q[u] = cost_field[nxt.row, nxt.col] + g[nxt_index]

    logger.debug(
        "planned goal=%s current=%s expansions=%d reachable=%s",
        tuple(x_g),
        None if x_t is None else tuple(x_t),
        expansions,
        bool(np.isfinite(q).any()),
    )
    return PlanResult(
        shape=(height, width),
        goal=x_g,
        current=x_t,
        g=g,
        child=child,
        closed=closed,
        q_at_current=q,
        cost_field=cost_field,
        blocked=blocked,
        expansions=expansions,
    )


def cost_to_go(x_g: AgentState, cost_field: np.ndarray, blocked: np.ndarray | None = None) -> PlanResult:
    """Exact cost-to-go of every state that can reach ``x_g`` (full backward Dijkstra)."""
    return plan(None, x_g, cost_field, blocked=blocked)


def control_toward(result: PlanResult, x: AgentState) -> Control | None:
    """Control that follows the child pointer out of ``x``; ``None`` at the goal or if unsettled."""
    nxt = result.child_of(x) if result.is_closed(x) else None
    if nxt is None:
        return None
    for u in CONTROLS:
        if neighbour(x, u) == nxt:
            return u
    return None
