"""
learner/tests.py
================
Tests for the loss, its gradient chain, training and closed-loop rollouts.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from costnet.services import EncoderConfig, load_checkpoint
from gridworld.services import CONTROLS, AgentState, Control, GridParams, SemanticGrid, grid_from_rows
from gridworld.services.episodes import sample_episode
from gridworld.services.expert import Demonstration, generate_demonstration
from planner.services import boltzmann, plan, subgradient
from sensor.services import SensorParams
from learner.services import (
    REACHED,
    STEP_CAP,
    UNREACHABLE,
    EmptyDatasetError,
    LearnedCostStrategy,
    LearnerError,
    NavigationModel,
    OracleCostStrategy,
    TrainConfig,
    Trainer,
    cost_gradient,
    evaluate_split,
    loss_coefficients,
    loss_gradient_step,
    nll_loss,
    plan_step,
    record_episode,
    rollout,
    train,
)

SMALL_SENSOR = SensorParams(ray_count=8, angular_resolution=45.0, max_range=2.0)
SMALL_FCN = EncoderConfig(channels=(3, 4), seed=3)

CORRIDOR_ROOM = [
    "########",
    "#......#",
    "#.LLL..#",
    "#...L..#",
    "#gg.L..#",
    "#gg....#",
    "#......#",
    "########",
]


def small_model(config: EncoderConfig = SMALL_FCN, seed: int = 3) -> NavigationModel:
    return NavigationModel.from_config(config, psi_init=1.0, seed=seed)


def room_demo(start=(1, 1), goal=(6, 6), sensor: SensorParams = SMALL_SENSOR) -> Demonstration:
    demo = generate_demonstration(grid_from_rows(CORRIDOR_ROOM), AgentState(*start), AgentState(*goal), sensor)
    assert isinstance(demo, Demonstration)
    return demo


def episode_loss(demo: Demonstration, model: NavigationModel) -> tuple[float, tuple]:
    """Summed loss and the optimal-path signature of every finite control."""
    tape = record_episode(demo, LearnedCostStrategy(model), alpha=1.0, keep_caches=False)
    signature = []
    for record in tape.steps:
        for u in CONTROLS:
            if math.isfinite(record.q[u]):
                signature.append(tuple(sorted(subgradient(record.plan, record.state, u).arrival_counts().items())))
    return tape.loss, tuple(signature)


def perturbed(model: NavigationModel, name: str, flat: int, delta: float) -> NavigationModel:
    clone = model.copy()
    array = clone.trainable()[name].copy()
    array.ravel()[flat] += delta
    clone.assign({name: array})
    return clone


def brute_force_cost(grid: SemanticGrid, start: AgentState, goal: AgentState) -> float:
    """Cheapest simple path by depth-first enumeration with a cost bound."""
    costs = grid.arrival_costs()
    best = [math.inf]

    def visit(x: AgentState, spent: float, seen: set) -> None:
        if spent >= best[0]:
            return
        if x == goal:
            best[0] = spent
            return
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = AgentState(x.row + dr, x.col + dc)
            if grid.is_traversable(nxt) and nxt not in seen:
                seen.add(nxt)
                visit(nxt, spent + costs[nxt.row, nxt.col], seen)
                seen.discard(nxt)

    visit(start, 0.0, {start})
    return best[0]


class NllLossTests(SimpleTestCase):
    def test_uniform_policy(self) -> None:
        self.assertAlmostEqual(nll_loss(np.full(4, 0.25), Control.LEFT), math.log(4), places=12)

    def test_certain_policy(self) -> None:
        self.assertEqual(nll_loss(np.array([0.0, 1.0, 0.0, 0.0]), Control.DOWN), 0.0)

    def test_worked_example(self) -> None:
        policy = np.array([0.6439, 0.2369, 0.0871, 0.0321])
        self.assertAlmostEqual(nll_loss(policy, 1), 1.4403, places=4)

    def test_zero_probability(self) -> None:
        policy = np.array([1.0, 0.0, 0.0, 0.0])
        self.assertTrue(math.isinf(nll_loss(policy, 2)))
        self.assertEqual(nll_loss(policy, 2, clamp=50.0), 50.0)


class LossCoefficientTests(SimpleTestCase):
    def test_certain_demonstration_has_no_gradient(self) -> None:
        q = np.array([0.0, math.inf, math.inf, math.inf])
        coefficients = loss_coefficients(q, boltzmann(q, 1.0), 0, 1.0)
        np.testing.assert_array_equal(coefficients, np.zeros(4))

    def test_formula_and_zero_sum(self) -> None:
        q = np.array([3.0, 1.0, 2.0, math.inf])
        policy = boltzmann(q, 0.5)
        coefficients = loss_coefficients(q, policy, 2, 0.5)
        expected = -policy / 0.5
        expected[2] += 2.0
        expected[3] = 0.0
        np.testing.assert_allclose(coefficients, expected)
        self.assertAlmostEqual(coefficients.sum(), 0.0, places=12)

    def test_matches_finite_differences_of_the_loss(self) -> None:
        q = np.array([2.0, 2.5, 4.0, 3.0])
        coefficients = loss_coefficients(q, boltzmann(q, 0.7), 3, 0.7)
        for u in range(4):
            bump = np.zeros(4)
            bump[u] = 1e-6
            numeric = (nll_loss(boltzmann(q + bump, 0.7), 3) - nll_loss(boltzmann(q - bump, 0.7), 3)) / 2e-6
            self.assertAlmostEqual(coefficients[u], numeric, places=7)

    def test_temperature_flattens_but_keeps_the_argmax(self) -> None:
        q = np.array([4.0, 2.0, 3.0, 6.0])
        sharp, flat = boltzmann(q, 0.5), boltzmann(q, 5.0)
        self.assertEqual(int(np.argmax(sharp)), int(np.argmax(flat)))
        self.assertLess(flat.max(), sharp.max())


class CostGradientTests(SimpleTestCase):
    def test_single_step_by_hand(self) -> None:
        costs = np.array([[2.0, 1.0, 1.0], [1.0, 3.0, 5.0], [2.0, 1.0, 1.0]])
        x_t, goal = AgentState(1, 1), AgentState(1, 2)
        result = plan(x_t, goal, costs)
        np.testing.assert_allclose(result.q_at_current, [7.0, 7.0, 9.0, 5.0])

        policy = boltzmann(result.q_at_current, 1.0)
        coefficients = loss_coefficients(result.q_at_current, policy, Control.RIGHT, 1.0)
        gradient = cost_gradient(result, x_t, coefficients).toarray()

        up, down, left = coefficients[Control.UP], coefficients[Control.DOWN], coefficients[Control.LEFT]
        expected = np.array([[0.0, up, up], [left, left, 0.0], [0.0, down, down]])
        expected[1, 2] = coefficients.sum()
        np.testing.assert_allclose(gradient, expected, atol=1e-15)
        self.assertAlmostEqual(
            float((gradient * costs).sum()), float(coefficients @ result.q_at_current), places=12
        )


class PipelineGradientTests(SimpleTestCase):
    def test_tape_loss_is_sum_of_step_losses(self) -> None:
        demo = room_demo()
        tape = record_episode(demo, LearnedCostStrategy(small_model()), alpha=1.0)
        self.assertEqual(len(tape), demo.length)
        self.assertEqual(tape.loss, math.fsum(s.loss for s in tape.steps))
        tape.release()
        self.assertFalse(tape.differentiable)

    def test_gradient_needs_caches(self) -> None:
        model = small_model()
        tape = record_episode(room_demo(), LearnedCostStrategy(model), alpha=1.0, keep_caches=False)
        with self.assertRaises(LearnerError):
            loss_gradient_step(tape, model)

    def test_matches_finite_differences(self) -> None:
        demo = room_demo(start=(1, 1), goal=(1, 4), sensor=SensorParams())
        self.assertEqual(demo.length, 3)
        model = small_model()
        tape = record_episode(demo, LearnedCostStrategy(model), alpha=1.0)
        d_phi, d_psi, loss = loss_gradient_step(tape, model)
        base_loss, base_signature = episode_loss(demo, model)
        self.assertAlmostEqual(loss, base_loss, places=12)

        analytic = {**d_phi.snapshot(), "psi": d_psi}
        rng = np.random.default_rng(0)
        phi_names = list(d_phi)
        coordinates = [("psi", int(rng.integers(4, 16))) for _ in range(10)]
        for _ in range(10):
            name = phi_names[int(rng.integers(len(phi_names)))]
            coordinates.append((name, int(rng.integers(analytic[name].size))))

        delta, checked = 1e-6, 0
        for name, flat in coordinates:
            plus, plus_signature = episode_loss(demo, perturbed(model, name, flat, delta))
            minus, minus_signature = episode_loss(demo, perturbed(model, name, flat, -delta))
            if plus_signature != base_signature or minus_signature != base_signature:
                continue
            left, right = (base_loss - minus) / delta, (plus - base_loss) / delta
            central = (plus - minus) / (2 * delta)
            if abs(left - right) > 1e-3 * max(1.0, abs(central)):
                continue
            value = float(analytic[name].ravel()[flat])
            error = abs(value - central) / max(abs(value), abs(central), 1e-4)
            self.assertLess(error, 1e-3, f"{name}[{flat}]: analytic {value} numeric {central}")
            checked += 1
        self.assertGreaterEqual(checked, 8)


class TrainingTests(SimpleTestCase):
    def test_zero_epochs_leave_the_model_alone(self) -> None:
        model = small_model()
        before = {name: a.copy() for name, a in model.trainable().items()}
        with tempfile.TemporaryDirectory() as tmp:
            result = train([room_demo()], TrainConfig(epochs=0), model, checkpoint_dir=tmp)
            self.assertTrue((Path(tmp) / "best.json").is_file())
            self.assertEqual(load_checkpoint(Path(tmp) / "best.json").epoch, 0)
        self.assertEqual(result.history, [])
        for name, value in model.trainable().items():
            np.testing.assert_array_equal(value, before[name])

    def test_single_episode_overfits(self) -> None:
        demo = room_demo()
        model = small_model(EncoderConfig(channels=(4, 4), seed=1), seed=1)
        initial_nll, _ = evaluate_split(model, [demo], alpha=1.0)
        result = train([demo], TrainConfig(epochs=60, batch_size=1, lr=0.02), model)
        final_nll, final_acc = evaluate_split(model, [demo], alpha=1.0)
        self.assertEqual(len(result.history), 60)
        self.assertLess(final_nll, initial_nll)
        self.assertLess(final_nll, math.log(4))
        self.assertGreater(final_acc, 0.25)

    def test_identical_seeds_give_identical_checkpoints(self) -> None:
        demos = [room_demo(), room_demo(start=(6, 1), goal=(1, 6))]
        config = TrainConfig(epochs=2, batch_size=2, lr=0.01, seed=5)
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            train(demos, config, small_model(), checkpoint_dir=first)
            train(demos, config, small_model(), checkpoint_dir=second)
            self.assertEqual((Path(first) / "last.json").read_bytes(), (Path(second) / "last.json").read_bytes())

    def test_resume_matches_uninterrupted_run(self) -> None:
        demos = [room_demo(), room_demo(start=(6, 1), goal=(1, 6))]
        config = TrainConfig(epochs=2, batch_size=1, lr=0.01, seed=2)
        with tempfile.TemporaryDirectory() as full, tempfile.TemporaryDirectory() as part:
            straight = train(demos, config, small_model(), val=demos[:1], checkpoint_dir=full)
            train(demos, TrainConfig(epochs=1, batch_size=1, lr=0.01, seed=2), small_model(), val=demos[:1], checkpoint_dir=part)
            resumed_trainer = Trainer.resume(load_checkpoint(Path(part) / "last.json"), config)
            resumed = resumed_trainer.fit(demos, demos[:1])
            self.assertEqual(resumed.history, straight.history[2:])
            for name, value in resumed_trainer.model.trainable().items():
                np.testing.assert_array_equal(value, straight.model.trainable()[name])

    def test_resume_keeps_the_best_checkpoint_of_earlier_epochs(self) -> None:
        demos = [room_demo(), room_demo(start=(6, 1), goal=(1, 6))]
        with tempfile.TemporaryDirectory() as tmp:
            first = train(
                demos, TrainConfig(epochs=1, batch_size=1, lr=0.01, seed=2), small_model(), val=demos[:1], checkpoint_dir=tmp
            )
            best_bytes = (Path(tmp) / "best.json").read_bytes()
            last = load_checkpoint(Path(tmp) / "last.json")
            self.assertEqual(last.best_epoch, 1)
            self.assertEqual(last.best_nll, first.best_nll)

            trainer = Trainer.resume(last, TrainConfig(epochs=2, batch_size=1, lr=0.01, seed=2))
            self.assertEqual(trainer.best_epoch, 1)
            worse = (first.best_nll + 1.0, 0.0)
            with mock.patch("learner.services.trainer.evaluate_split", return_value=worse):
                resumed = trainer.fit(demos, demos[:1], checkpoint_dir=tmp)

            self.assertEqual((Path(tmp) / "best.json").read_bytes(), best_bytes)
            self.assertEqual(resumed.best_epoch, 1)
            self.assertEqual(resumed.best_nll, first.best_nll)
            self.assertEqual(load_checkpoint(Path(tmp) / "last.json").best_epoch, 1)

    def test_fresh_checkpoints_have_no_best_epoch(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            train([room_demo()], TrainConfig(epochs=0), small_model(), checkpoint_dir=tmp)
            checkpoint = load_checkpoint(Path(tmp) / "last.json")
        self.assertIsNone(checkpoint.best_epoch)
        self.assertIsNone(checkpoint.best_nll)

    def test_empty_dataset(self) -> None:
        with self.assertRaises(EmptyDatasetError):
            train([], TrainConfig(epochs=1), small_model())

    def test_invalid_settings(self) -> None:
        with self.assertRaises(LearnerError):
            TrainConfig(alpha=0.0)
        with self.assertRaises(LearnerError):
            TrainConfig(lr=-1.0)
        self.assertEqual(TrainConfig.from_dict({"epochs": 3, "resume": None}, seed=9).seed, 9)


class RolloutTests(SimpleTestCase):
    def test_start_at_goal(self) -> None:
        grid = grid_from_rows(CORRIDOR_ROOM)
        result = rollout(grid, AgentState(1, 1), AgentState(1, 1), LearnedCostStrategy(small_model()), 10, SMALL_SENSOR)
        self.assertTrue(result.reached)
        self.assertEqual(result.reason, REACHED)
        self.assertEqual(result.controls, [])

    def test_walled_off_goal_is_unreachable(self) -> None:
        grid = grid_from_rows(["#######", "#..#..#", "#..#..#", "#######"])
        result = rollout(grid, AgentState(1, 1), AgentState(1, 5), OracleCostStrategy(4), 20, SMALL_SENSOR)
        self.assertFalse(result.reached)
        self.assertEqual(result.reason, UNREACHABLE)

    def test_step_cap(self) -> None:
        grid = grid_from_rows(CORRIDOR_ROOM)
        result = rollout(grid, AgentState(1, 1), AgentState(6, 6), LearnedCostStrategy(small_model()), 1, SMALL_SENSOR)
        self.assertFalse(result.reached)
        self.assertEqual(result.reason, STEP_CAP)
        self.assertEqual(result.steps, 1)

    def test_oracle_costs_follow_the_cheapest_path(self) -> None:
        params = GridParams(width=6, height=6, rect_count=(1, 3), rect_size=(1, 2))
        checked = 0
        for seed in range(30):
            demo = sample_episode(seed, params, sensor_params=SMALL_SENSOR)
            if not isinstance(demo, Demonstration):
                continue
            result = rollout(
                demo.grid, demo.start, demo.goal, OracleCostStrategy(4), 2 * demo.length, SMALL_SENSOR
            )
            self.assertTrue(result.reached)
            self.assertAlmostEqual(result.path_cost(demo.grid), demo.path_cost(), places=9)
            self.assertAlmostEqual(result.path_cost(demo.grid), brute_force_cost(demo.grid, demo.start, demo.goal), places=9)
            checked += 1
        self.assertGreaterEqual(checked, 5)

    def test_identical_inputs_give_identical_trajectories(self) -> None:
        grid = grid_from_rows(CORRIDOR_ROOM)
        runs = [
            rollout(grid, AgentState(1, 1), AgentState(6, 6), LearnedCostStrategy(small_model()), 20, SMALL_SENSOR)
            for _ in range(2)
        ]
        self.assertEqual(runs[0].states, runs[1].states)
        self.assertEqual(runs[0].reason, runs[1].reason)

    def test_maxent_planner_heads_for_the_goal(self) -> None:
        step_plan = plan_step(np.full((6, 6), 5.0), AgentState(2, 2), AgentState(2, 4), 1.0, planner="maxent")
        self.assertIsNone(step_plan.result)
        self.assertAlmostEqual(step_plan.policy.sum(), 1.0, places=12)
        self.assertEqual(int(np.argmax(step_plan.policy)), Control.RIGHT)
        with self.assertRaises(LearnerError):
            plan_step(np.ones((4, 4)), AgentState(1, 1), AgentState(2, 2), 1.0, planner="dijkstra")
