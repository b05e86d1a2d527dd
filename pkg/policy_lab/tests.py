"""
policy_lab/tests.py
===================
Tests for the hard-min and soft-min Bellman operators and their fixed points.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from gridworld.services import AgentState, Control
from gridworld.services.rendering import read_ppm
from planner.services import plan
from policy_lab.services import (
    GridMDP,
    PolicyLabConfig,
    PolicyLabError,
    bellman_hard,
    bellman_soft,
    bordered_grid_mdp,
    extract_policy,
    initial_table,
    run_policy_lab,
    sup_norm_change,
    value_iteration,
    write_comparison,
)


def corridor_mdp(length: int) -> GridMDP:
    return GridMDP(costs=np.ones((1, length + 1)), goal=AgentState(0, length), blocked=np.zeros((1, length + 1), bool))


def exhaustive_hard_q(mdp: GridMDP, gamma: float) -> np.ndarray:
    """Gauss-Seidel sweeps with explicit loops until nothing moves."""
    height, width = mdp.shape
    v = np.zeros(mdp.size)
    for _ in range(100_000):
        biggest = 0.0
        for index in range(mdp.size):
            if index == mdp.goal_index:
                continue
            row, col = divmod(index, width)
            best = math.inf
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                r, c = row + dr, col + dc
                if 0 <= r < height and 0 <= c < width and not mdp.blocked[r, c]:
                    best = min(best, mdp.costs[r, c] + gamma * v[r * width + c])
            if math.isfinite(best):
                biggest = max(biggest, abs(best - v[index]))
                v[index] = best
        if biggest < 1e-13:
            break
    q = np.full((mdp.size, 4), math.inf)
    for index in range(mdp.size):
        for u in range(4):
            nxt = mdp.successor[index, u]
            if nxt >= 0:
                q[index, u] = mdp.step_cost[index, u] + gamma * v[nxt]
    q[mdp.goal_index] = 0.0
    return q


class BellmanTests(SimpleTestCase):
    def test_goal_row_stays_zero(self) -> None:
        mdp, _ = bordered_grid_mdp(5)
        q = initial_table(mdp) + 3.0
        for update in (bellman_hard(q, mdp, 0.9), bellman_soft(q, mdp, 0.9, 1.0)):
            np.testing.assert_array_equal(update[mdp.goal_index], np.zeros(4))

    def test_corridor_value_is_a_geometric_sum(self) -> None:
        n, gamma = 6, 0.95
        table = value_iteration("hard", corridor_mdp(n), gamma=gamma, tol=1e-12)
        expected = sum(gamma**i for i in range(n))
        self.assertAlmostEqual(table.q_at((0, 0))[Control.RIGHT], expected, places=10)
        self.assertTrue(math.isinf(table.q_at((0, 0))[Control.LEFT]))

    def test_hard_fixed_point_matches_exhaustive_evaluation(self) -> None:
        rng = np.random.default_rng(0)
        blocked = np.zeros((6, 6), dtype=bool)
        blocked[2, 1:4] = True
        mdp = GridMDP(costs=rng.uniform(0.1, 3.0, (6, 6)), goal=AgentState(5, 5), blocked=blocked)
        table = value_iteration("hard", mdp, gamma=0.9, tol=1e-12)
        oracle = exhaustive_hard_q(mdp, 0.9)
        finite = np.isfinite(oracle)
        np.testing.assert_array_equal(np.isfinite(table.q), finite)
        np.testing.assert_allclose(table.q[finite], oracle[finite], atol=1e-9)

    def test_single_control_successor_soft_equals_hard(self) -> None:
        # the corridor's first cell has one control
        mdp = corridor_mdp(4)
        q = np.where(mdp.valid, np.arange(mdp.size * 4, dtype=float).reshape(-1, 4), np.inf)
        hard, soft = bellman_hard(q, mdp, 0.9), bellman_soft(q, mdp, 0.9, 0.7)
        left_of_start = mdp.index((0, 1))
        self.assertAlmostEqual(soft[left_of_start, Control.LEFT], hard[left_of_start, Control.LEFT], places=12)

    def test_soft_is_below_hard_at_every_iterate(self) -> None:
        mdp, _ = bordered_grid_mdp(6)
        hard = soft = initial_table(mdp)
        for _ in range(30):
            hard, soft = bellman_hard(hard, mdp, 0.95), bellman_soft(soft, mdp, 0.95, 1.0)
            finite = np.isfinite(hard)
            self.assertTrue(np.all(soft[finite] <= hard[finite] + 1e-12))

    def test_zero_discount_gives_costs_after_one_sweep(self) -> None:
        mdp, _ = bordered_grid_mdp(5)
        expected = mdp.step_cost.copy()
        expected[mdp.goal_index] = 0.0
        np.testing.assert_array_equal(bellman_hard(initial_table(mdp), mdp, 0.0), expected)
        table = value_iteration("hard", mdp, gamma=0.0)
        self.assertTrue(table.converged)
        self.assertEqual(table.iterations, 2)

    def test_bad_discount_or_temperature(self) -> None:
        mdp, _ = bordered_grid_mdp(5)
        with self.assertRaises(PolicyLabError):
            bellman_hard(initial_table(mdp), mdp, 1.5)
        with self.assertRaises(PolicyLabError):
            bellman_soft(initial_table(mdp), mdp, 0.9, 0.0)


class ValueIterationTests(SimpleTestCase):
    def test_soft_approaches_hard_as_temperature_vanishes(self) -> None:
        mdp = GridMDP(costs=np.ones((4, 4)), goal=AgentState(3, 3), blocked=np.zeros((4, 4), bool))
        hard = value_iteration("hard", mdp, gamma=0.4, tol=1e-12)
        soft = value_iteration("soft", mdp, gamma=0.4, alpha=1e-3, tol=1e-12)
        finite = np.isfinite(hard.q)
        self.assertLess(np.abs(soft.q[finite] - hard.q[finite]).max(), 1e-3)

    def test_bordered_room_fixed_points(self) -> None:
        mdp, _ = bordered_grid_mdp(16)
        hard = value_iteration("hard", mdp, gamma=0.95, alpha=1.0, tol=1e-10)
        soft = value_iteration("soft", mdp, gamma=0.95, alpha=1.0, tol=1e-10)
        self.assertTrue(hard.converged and soft.converged)
        finite = np.isfinite(hard.q)
        self.assertTrue(np.all(soft.q[finite] <= hard.q[finite]))

    def test_iterates_contract(self) -> None:
        rng = np.random.default_rng(1)
        gamma = 0.8
        for _ in range(3):
            mdp = GridMDP(costs=rng.uniform(0.0, 2.0, (5, 5)), goal=AgentState(4, 0), blocked=np.zeros((5, 5), bool))
            for operator in ("hard", "soft"):
                fixed = value_iteration(operator, mdp, gamma=gamma, tol=1e-13).q
                q = initial_table(mdp)
                for _ in range(15):
                    nxt = bellman_hard(q, mdp, gamma) if operator == "hard" else bellman_soft(q, mdp, gamma, 1.0)
                    self.assertLessEqual(sup_norm_change(nxt, fixed), gamma * sup_norm_change(q, fixed) + 1e-9)
                    q = nxt

    def test_budget_exhaustion_is_flagged(self) -> None:
        mdp, _ = bordered_grid_mdp(8)
        table = value_iteration("hard", mdp, gamma=0.95, max_iters=3)
        self.assertFalse(table.converged)
        self.assertEqual(table.iterations, 3)
        self.assertEqual(len(table.deltas), 3)

    def test_invalid_settings(self) -> None:
        mdp, _ = bordered_grid_mdp(5)
        with self.assertRaises(PolicyLabError):
            value_iteration("hard", mdp, tol=0.0)
        with self.assertRaises(PolicyLabError):
            value_iteration("median", mdp)

    def test_matches_planner_with_unit_discount(self) -> None:
        rng = np.random.default_rng(2)
        costs = rng.uniform(0.5, 2.0, (5, 5))
        goal, x_t = AgentState(0, 4), AgentState(4, 0)
        table = value_iteration("hard", GridMDP(costs=costs, goal=goal, blocked=np.zeros((5, 5), bool)), gamma=1.0, tol=1e-12)
        self.assertTrue(table.converged)
        np.testing.assert_allclose(table.q_at(x_t), plan(x_t, goal, costs).q_at_current, atol=1e-9)

    def test_policy_at_symmetric_state_is_uniform(self) -> None:
        mdp, _ = bordered_grid_mdp(6)
        policy = extract_policy(value_iteration("soft", mdp))
        np.testing.assert_allclose(policy[mdp.goal_index], [0.25] * 4)
        valid_rows = mdp.valid.any(axis=1)
        np.testing.assert_allclose(policy[valid_rows].sum(axis=1), 1.0)


class ComparisonTests(SimpleTestCase):
    def test_bordered_room(self) -> None:
        comparison = run_policy_lab(PolicyLabConfig(size=16, gamma=0.95, alpha=1.0, tol=1e-8))
        self.assertTrue(comparison.converged)
        self.assertTrue(comparison.soft_below_hard)
        self.assertTrue(comparison.hard_path.reached)
        self.assertTrue(comparison.soft_path.reached)
        self.assertGreaterEqual(comparison.agreement, 0.9)

    def test_artifacts(self) -> None:
        comparison = run_policy_lab(PolicyLabConfig(size=6))
        with tempfile.TemporaryDirectory() as tmp:
            written = write_comparison(comparison, tmp)
            for name in ("value_hard", "value_soft", "policy_hard", "policy_soft"):
                self.assertEqual(read_ppm(written[name]).shape, (48, 48, 3))
            summary = pd.read_csv(Path(tmp) / "comparison.csv")
            table = pd.read_csv(written["q_table"])
        self.assertIn("agreement", summary.columns)
        self.assertTrue(bool(summary.loc[0, "soft_below_hard"]))
        self.assertEqual(list(table.columns), ["row", "col", "control", "q_hard", "q_soft", "pi_hard", "pi_soft"])
