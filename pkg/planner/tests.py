"""
planner/tests.py
================
Tests for backward A*, Boltzmann policies and visitation subgradients.
"""

from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase

from gridworld.services import AgentState, Control
from planner.services import (
    InfiniteCostToGoError,
    InvalidPlanningInputError,
    SearchTrace,
    UnreachableGoalError,
    boltzmann,
    control_toward,
    cost_to_go,
    greedy_control,
    log_boltzmann,
    manhattan_heuristic,
    plan,
    subgradient,
)

MOVES = {Control.UP: (-1, 0), Control.DOWN: (1, 0), Control.LEFT: (0, -1), Control.RIGHT: (0, 1)}


def value_iteration_q(cost_field: np.ndarray, blocked: np.ndarray, goal, x_t) -> np.ndarray:
    """Bellman sweeps until a fixed point, then Q at ``x_t``."""
    height, width = cost_field.shape
    v = np.full((height, width), math.inf)
    v[goal[0], goal[1]] = 0.0

    def valid(r: int, c: int) -> bool:
        return 0 <= r < height and 0 <= c < width and not blocked[r, c]

    for _ in range(height * width + 1):
        changed = False
        for r in range(height):
            for c in range(width):
                if not valid(r, c) or (r, c) == tuple(goal):
                    continue
                for dr, dc in MOVES.values():
                    nr, nc = r + dr, c + dc
                    if valid(nr, nc) and cost_field[nr, nc] + v[nr, nc] < v[r, c] - 1e-15:
                        v[r, c] = cost_field[nr, nc] + v[nr, nc]
                        changed = True
        if not changed:
            break
    q = np.full(4, math.inf)
    for u, (dr, dc) in MOVES.items():
        nr, nc = x_t[0] + dr, x_t[1] + dc
        if valid(nr, nc):
            q[u] = cost_field[nr, nc] + v[nr, nc]
    return q, v


def random_instance(rng: np.random.Generator, height: int, width: int):
    costs = rng.uniform(0.0, 5.0, size=(height, width))
    blocked = rng.random((height, width)) < 0.2
    cells = rng.permutation(height * width)[:2]
    x_t = AgentState(int(cells[0] // width), int(cells[0] % width))
    goal = AgentState(int(cells[1] // width), int(cells[1] % width))
    blocked[x_t.row, x_t.col] = False
    blocked[goal.row, goal.col] = False
    return costs, blocked, x_t, goal


# ──────────────────────────────────────────────
# plan
# ──────────────────────────────────────────────


class PlanTests(SimpleTestCase):
    def test_adjacent_goal_with_unit_costs(self) -> None:
        result = plan(AgentState(1, 1), AgentState(1, 2), np.ones((3, 3)))
        self.assertEqual(result.q_at_current[Control.RIGHT], 1.0)
        self.assertEqual(result.g_at(AgentState(1, 2)), 0.0)
        self.assertTrue(result.reachable)

    def test_free_4x4_q_is_manhattan_plus_one(self) -> None:
        costs = np.ones((4, 4))
        blocked = np.zeros((4, 4), dtype=bool)
        goal, x_t = AgentState(3, 3), AgentState(1, 1)
        result = plan(x_t, goal, costs)
        oracle, _ = value_iteration_q(costs, blocked, goal, x_t)
        for u, (dr, dc) in MOVES.items():
            nr, nc = x_t.row + dr, x_t.col + dc
            expected = abs(nr - goal.row) + abs(nc - goal.col) + 1
            self.assertEqual(result.q_at_current[u], expected)
        np.testing.assert_allclose(result.q_at_current, oracle, atol=1e-12)

    def test_enclosed_goal_is_unreachable(self) -> None:
        costs = np.ones((6, 6))
        blocked = np.zeros((6, 6), dtype=bool)
        blocked[2:5, 2:5] = True
        blocked[3, 3] = False
        result = plan(AgentState(0, 0), AgentState(3, 3), costs, blocked=blocked)
        self.assertTrue(np.all(np.isinf(result.q_at_current)))
        self.assertFalse(result.reachable)
        with self.assertRaises(UnreachableGoalError):
            boltzmann(result.q_at_current, 1.0)

    def test_controls_off_grid_or_into_blocked_cells_are_infinite(self) -> None:
        blocked = np.zeros((3, 3), dtype=bool)
        blocked[1, 0] = True
        result = plan(AgentState(0, 0), AgentState(2, 2), np.ones((3, 3)), blocked=blocked)
        self.assertTrue(math.isinf(result.q_at_current[Control.UP]))
        self.assertTrue(math.isinf(result.q_at_current[Control.LEFT]))
        self.assertTrue(math.isinf(result.q_at_current[Control.DOWN]))
        self.assertEqual(result.q_at_current[Control.RIGHT], 4.0)

    def test_matches_value_iteration_on_random_small_grids(self) -> None:
        rng = np.random.default_rng(0)
        for trial in range(40):
            height, width = int(rng.integers(3, 9)), int(rng.integers(3, 9))
            costs, blocked, x_t, goal = random_instance(rng, height, width)
            result = plan(x_t, goal, costs, blocked=blocked)
            oracle, v = value_iteration_q(costs, blocked, goal, x_t)
            np.testing.assert_allclose(result.q_at_current, oracle, atol=1e-9, err_msg=f"trial {trial}")
            closed = result.closed.reshape(costs.shape)
            np.testing.assert_allclose(result.g.reshape(costs.shape)[closed], v[closed], atol=1e-9)
            self.assertLessEqual(result.expansions, height * width)

    def test_manhattan_heuristic_gives_identical_q(self) -> None:
        rng = np.random.default_rng(1)
        for _ in range(30):
            costs, blocked, x_t, goal = random_instance(rng, 8, 8)
            exact = plan(x_t, goal, costs, blocked=blocked)
            guided = plan(x_t, goal, costs, heuristic=manhattan_heuristic(float(costs.min())), blocked=blocked)
            np.testing.assert_allclose(guided.q_at_current, exact.q_at_current, atol=1e-9)

    def test_inflated_heuristic_never_underestimates(self) -> None:
        rng = np.random.default_rng(2)
        for _ in range(20):
            costs, blocked, x_t, goal = random_instance(rng, 8, 8)
            exact = plan(x_t, goal, costs, blocked=blocked)
            fast = plan(x_t, goal, costs, heuristic=manhattan_heuristic(float(costs.min())), eps_weight=3.0, blocked=blocked)
            finite = np.isfinite(exact.q_at_current)
            np.testing.assert_array_equal(np.isfinite(fast.q_at_current), finite)
            self.assertTrue(np.all(fast.q_at_current[finite] >= exact.q_at_current[finite] - 1e-9))

    def test_closed_states_satisfy_the_q_identity_and_reach_the_goal(self) -> None:
        rng = np.random.default_rng(3)
        costs, blocked, x_t, goal = random_instance(rng, 7, 7)
        result = plan(x_t, goal, costs, blocked=blocked)
        for index in np.flatnonzero(result.closed):
            state = result.state_of(int(index))
            path = result.path_from(state)
            self.assertEqual(path[-1], goal)
            self.assertEqual(len(set(path)), len(path))
            if state != goal:
                child = result.child_of(state)
                self.assertAlmostEqual(result.g_at(state), costs[child.row, child.col] + result.g_at(child), places=12)

    def test_full_search_matches_exhaustive_cost_to_go(self) -> None:
        rng = np.random.default_rng(4)
        costs, blocked, x_t, goal = random_instance(rng, 8, 8)
        result = cost_to_go(goal, costs, blocked=blocked)
        _, v = value_iteration_q(costs, blocked, goal, x_t)
        g = result.g.reshape(costs.shape)
        reachable = np.isfinite(v)
        np.testing.assert_allclose(g[reachable], v[reachable], atol=1e-9)
        self.assertTrue(np.all(np.isinf(g[~reachable])))

    def test_control_toward_follows_child_pointer(self) -> None:
        result = cost_to_go(AgentState(0, 3), np.ones((1, 4)))
        self.assertEqual(control_toward(result, AgentState(0, 0)), Control.RIGHT)
        self.assertIsNone(control_toward(result, AgentState(0, 3)))

    def test_trace_records_expansion_order(self) -> None:
        trace = SearchTrace()
        result = plan(AgentState(0, 0), AgentState(2, 2), np.ones((3, 3)), trace=trace)
        self.assertEqual(len(trace.expansions), result.expansions)
        self.assertEqual(trace.expansions[0], AgentState(2, 2))
        self.assertEqual(trace.g_values[0], 0.0)
        self.assertEqual(trace.g_values, sorted(trace.g_values))
        self.assertEqual(trace.to_dict()["expansion_order"][0], [2, 2])

    def test_invalid_inputs_are_rejected(self) -> None:
        with self.assertRaises(InvalidPlanningInputError):
            plan(AgentState(0, 0), AgentState(1, 1), -np.ones((3, 3)))
        blocked = np.zeros((3, 3), dtype=bool)
        blocked[1, 1] = True
        with self.assertRaises(InvalidPlanningInputError):
            plan(AgentState(0, 0), AgentState(1, 1), np.ones((3, 3)), blocked=blocked)
        with self.assertRaises(InvalidPlanningInputError):
            plan(AgentState(0, 0), AgentState(1, 1), np.ones((3, 3)), eps_weight=0.5)
        with self.assertRaises(InvalidPlanningInputError):
            plan(AgentState(5, 0), AgentState(1, 1), np.ones((3, 3)))

    def test_q_values_at_other_closed_state(self) -> None:
        costs = np.ones((4, 4))
        result = cost_to_go(AgentState(0, 0), costs)
        np.testing.assert_array_equal(result.q_values_at(AgentState(2, 2)), [4.0, 6.0, 4.0, 6.0])

    def test_q_values_at_state_beyond_the_early_stop(self) -> None:
        result = plan(AgentState(0, 1), AgentState(0, 0), np.ones((1, 8)))
        np.testing.assert_array_equal(result.q_values_at(AgentState(0, 1)), [math.inf, math.inf, 1.0, 3.0])
        with self.assertRaises(InfiniteCostToGoError) as ctx:
            result.q_values_at(AgentState(0, 3))
        self.assertEqual(ctx.exception.details["control"], Control.RIGHT.label)
        self.assertEqual(ctx.exception.details["state"], [0, 3])

    def test_q_values_at_behind_a_wall_raises(self) -> None:
        blocked = np.zeros((1, 5), dtype=bool)
        blocked[0, 2] = True
        result = plan(AgentState(0, 3), AgentState(0, 0), np.ones((1, 5)), blocked=blocked)
        self.assertFalse(result.reachable)
        with self.assertRaises(InfiniteCostToGoError):
            result.q_values_at(AgentState(0, 3))


# ──────────────────────────────────────────────
# Boltzmann policy
# ──────────────────────────────────────────────


class BoltzmannTests(SimpleTestCase):
    def test_equal_q_gives_uniform(self) -> None:
        np.testing.assert_allclose(boltzmann(np.full(4, 3.0), 0.7), [0.25] * 4)

    def test_single_finite_control_is_certain(self) -> None:
        for alpha in (0.01, 1.0, 100.0):
            np.testing.assert_array_equal(boltzmann(np.array([0.0, math.inf, math.inf, math.inf]), alpha), [1, 0, 0, 0])

    def test_softmax_of_negative_q(self) -> None:
        np.testing.assert_allclose(
            boltzmann(np.array([1.0, 2.0, 3.0, 4.0]), 1.0), [0.6439, 0.2369, 0.0871, 0.0321], atol=5e-5
        )

    def test_large_q_values_are_stable(self) -> None:
        probabilities = boltzmann(np.array([1e6, 1e6 + 1.0, math.inf, 1e6]), 1.0)
        self.assertAlmostEqual(probabilities.sum(), 1.0)
        self.assertEqual(probabilities[2], 0.0)
        self.assertAlmostEqual(probabilities[0], probabilities[3])

    def test_log_boltzmann_matches_log_of_boltzmann(self) -> None:
        q = np.array([0.5, math.inf, 2.0, 1.0])
        log_p = log_boltzmann(q, 0.5)
        self.assertEqual(log_p[1], -math.inf)
        finite = np.isfinite(q)
        np.testing.assert_allclose(np.exp(log_p[finite]), boltzmann(q, 0.5)[finite])

    def test_non_positive_alpha_is_rejected(self) -> None:
        with self.assertRaises(InvalidPlanningInputError):
            boltzmann(np.zeros(4), 0.0)

    def test_greedy_control_breaks_ties_by_order(self) -> None:
        self.assertEqual(greedy_control(np.array([0.1, 0.4, 0.4, 0.1])), 1)


# ──────────────────────────────────────────────
# Subgradient
# ──────────────────────────────────────────────


def corridor() -> tuple[np.ndarray, np.ndarray]:
    costs = np.ones((3, 8))
    blocked = np.ones((3, 8), dtype=bool)
    blocked[1, 1:7] = False
    return costs, blocked


class SubgradientTests(SimpleTestCase):
    def test_goal_one_step_away(self) -> None:
        result = plan(AgentState(1, 1), AgentState(1, 2), np.ones((3, 3)))
        mu = subgradient(result, AgentState(1, 1), Control.RIGHT)
        self.assertEqual(dict(mu.items()), {(AgentState(1, 1), Control.RIGHT): 1})

    def test_straight_corridor(self) -> None:
        costs, blocked = corridor()
        x_t, goal = AgentState(1, 1), AgentState(1, 6)
        result = plan(x_t, goal, costs, blocked=blocked)
        mu = subgradient(result, x_t, Control.RIGHT, costs)
        self.assertEqual(len(mu), 5)
        for col in range(1, 6):
            self.assertEqual(mu[(AgentState(1, col), Control.RIGHT)], 1)
        self.assertEqual(mu.inner_product(costs), result.q_at_current[Control.RIGHT])

    def test_inner_product_identity_on_random_grids(self) -> None:
        rng = np.random.default_rng(5)
        for _ in range(30):
            costs, blocked, x_t, goal = random_instance(rng, 8, 8)
            result = plan(x_t, goal, costs, blocked=blocked)
            for u in Control:
                if math.isfinite(result.q_at_current[u]):
                    mu = subgradient(result, x_t, u)
                    self.assertAlmostEqual(mu.inner_product(costs), result.q_at_current[u], places=9)

    def test_on_path_perturbation_moves_q_by_count(self) -> None:
        rng = np.random.default_rng(6)
        costs = rng.uniform(0.5, 2.0, size=(6, 6))
        x_t, goal = AgentState(0, 0), AgentState(5, 5)
        result = plan(x_t, goal, costs)
        u = Control(int(np.argmin(result.q_at_current)))
        mu = subgradient(result, x_t, u)
        cell, count = next(iter(mu.arrival_counts().items()))
        delta = 1e-6
        bumped = costs.copy()
        bumped[cell.row, cell.col] += delta
        q_bumped = plan(x_t, goal, bumped).q_at_current[u]
        self.assertAlmostEqual(q_bumped - result.q_at_current[u], count * delta, places=12)

    def test_subgradient_inequality(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(20):
            costs, blocked, x_t, goal = random_instance(rng, 6, 6)
            result = plan(x_t, goal, costs, blocked=blocked)
            finite = [u for u in Control if math.isfinite(result.q_at_current[u])]
            if not finite:
                continue
            u = finite[0]
            mu = subgradient(result, x_t, u)
            step = rng.uniform(-0.5, 1.0, size=costs.shape) * costs
            moved = plan(x_t, goal, costs + step, blocked=blocked).q_at_current[u]
            self.assertGreaterEqual(moved, result.q_at_current[u] + mu.inner_product(step) - 1e-9)

    def test_infinite_control_raises(self) -> None:
        costs, blocked = corridor()
        result = plan(AgentState(1, 1), AgentState(1, 6), costs, blocked=blocked)
        with self.assertRaises(InfiniteCostToGoError):
            subgradient(result, AgentState(1, 1), Control.UP)

    def test_cell_gradient_is_scaled_arrival_counts(self) -> None:
        costs, blocked = corridor()
        result = plan(AgentState(1, 1), AgentState(1, 6), costs, blocked=blocked)
        grad = subgradient(result, AgentState(1, 1), Control.RIGHT).cell_gradient(costs.shape, -0.5).toarray()
        expected = np.zeros(costs.shape)
        expected[1, 2:7] = -0.5
        np.testing.assert_array_equal(grad, expected)
