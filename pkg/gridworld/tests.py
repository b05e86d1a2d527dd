"""
gridworld/tests.py
==================
Tests for environment generation, dynamics, the expert and dataset files.
"""

from __future__ import annotations

import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from gridworld.services import (
    DEFAULT_CLASS_SET,
    AgentState,
    ClassSet,
    Control,
    DatasetSchemaError,
    GridParams,
    GridWorldError,
    ImageFormatError,
    InvalidClassSetError,
    InvalidGridError,
    InvalidStateError,
    SchemaVersionError,
    UnknownClassError,
    control_between,
    expert_cost_of_arrival,
    generate_environment,
    grid_from_rows,
    step,
)
from gridworld.services.dataset import DatasetRepository, load_dataset, save_dataset
from gridworld.services.episodes import generate_split, sample_episode, sample_start_goal
from gridworld.services.expert import Demonstration, InfeasibleDemonstration, generate_demonstration
from gridworld.services.rendering import class_image, heatmap, read_ppm, write_ppm
from sensor.services.lidar import SensorParams

SMALL_SENSOR = SensorParams(ray_count=8, angular_resolution=45.0, max_range=2.0)


def open_room(size: int) -> list[str]:
    inner = "#" + "." * (size - 2) + "#"
    return ["#" * size] + [inner] * (size - 2) + ["#" * size]


def exhaustive_cost_to_go(grid, goal: AgentState) -> np.ndarray:
    """Bellman-Ford relaxation over every traversable cell until nothing changes."""
    costs = grid.arrival_costs()
    dist = np.full(grid.shape, math.inf)
    dist[goal[0], goal[1]] = 0.0
    for _ in range(grid.height * grid.width):
        changed = False
        for r in range(grid.height):
            for c in range(grid.width):
                if not grid.is_traversable((r, c)) or (r, c) == tuple(goal):
                    continue
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    nr, nc = r + dr, c + dc
                    if grid.is_traversable((nr, nc)) and costs[nr, nc] + dist[nr, nc] < dist[r, c]:
                        dist[r, c] = costs[nr, nc] + dist[nr, nc]
                        changed = True
        if not changed:
            break
    return dist


class ClassSetTests(SimpleTestCase):
    def test_default_arrival_costs(self) -> None:
        self.assertEqual(expert_cost_of_arrival(DEFAULT_CLASS_SET, 0), 1.0)
        self.assertEqual(expert_cost_of_arrival(DEFAULT_CLASS_SET, DEFAULT_CLASS_SET.index_of("wall")), 100.0)
        self.assertEqual(expert_cost_of_arrival(DEFAULT_CLASS_SET, DEFAULT_CLASS_SET.index_of("lawn")), 0.5)
        self.assertEqual(expert_cost_of_arrival(DEFAULT_CLASS_SET, DEFAULT_CLASS_SET.index_of("lava")), 10.0)

    def test_out_of_range_index(self) -> None:
        with self.assertRaises(UnknownClassError) as ctx:
            expert_cost_of_arrival(DEFAULT_CLASS_SET, 4)
        self.assertEqual(ctx.exception.value, 4)
        with self.assertRaises(UnknownClassError):
            DEFAULT_CLASS_SET.index_of("water")

    def test_inconsistent_class_sets_rejected(self) -> None:
        colors = ((0, 0, 0), (255, 255, 255))
        with self.assertRaises(InvalidClassSetError):
            ClassSet(labels=("empty",), expert_costs=(1.0,), colors=colors[:1])
        with self.assertRaises(InvalidClassSetError):
            ClassSet(labels=("empty", "wall"), expert_costs=(1.0,), colors=colors)
        with self.assertRaises(InvalidClassSetError):
            ClassSet(labels=("empty", "wall"), expert_costs=(0.0, 100.0), colors=colors)
        with self.assertRaises(GridWorldError) as ctx:
            ClassSet(labels=("empty", "wall"), expert_costs=(5.0, 1.0), colors=colors)
        self.assertEqual(ctx.exception.details["labels"], ["empty", "wall"])

    def test_free_class_is_first(self) -> None:
        self.assertEqual(DEFAULT_CLASS_SET.labels[0], "empty")
        self.assertEqual(DEFAULT_CLASS_SET.count, 4)


class GenerateEnvironmentTests(SimpleTestCase):
    def test_zero_rectangles_gives_open_room(self) -> None:
        grid = generate_environment(0, GridParams(rect_count=(0, 0)))
        wall = DEFAULT_CLASS_SET.wall
        self.assertTrue(np.all(grid.cells[1:-1, 1:-1] == 0))
        self.assertTrue(np.all(grid.cells[0, :] == wall))
        self.assertTrue(np.all(grid.cells[-1, :] == wall))
        self.assertTrue(np.all(grid.cells[:, 0] == wall))
        self.assertTrue(np.all(grid.cells[:, -1] == wall))

    def test_same_seed_same_grid(self) -> None:
        self.assertEqual(generate_environment(7), generate_environment(7))

    def test_labels_are_known_classes(self) -> None:
        grid = generate_environment(1)
        self.assertEqual(grid.shape, (16, 16))
        self.assertTrue(set(np.unique(grid.cells)) <= {0, 1, 2, 3})
        self.assertEqual(grid.seed, 1)

    def test_degenerate_dimensions_rejected(self) -> None:
        with self.assertRaises(InvalidGridError):
            generate_environment(0, GridParams(width=3))
        with self.assertRaises(InvalidGridError):
            generate_environment(0, GridParams(rect_size=(3, 2)))

    def test_grid_is_read_only(self) -> None:
        grid = generate_environment(2)
        with self.assertRaises(ValueError):
            grid.cells[1, 1] = 2


class StepTests(SimpleTestCase):
    def setUp(self) -> None:
        self.grid = grid_from_rows(open_room(8))

    def test_plain_move(self) -> None:
        self.assertEqual(step(self.grid, AgentState(1, 1), Control.RIGHT), AgentState(1, 2))

    def test_wall_bump_keeps_state(self) -> None:
        self.assertEqual(step(self.grid, AgentState(1, 1), Control.UP), AgentState(1, 1))

    def test_inverse_controls_return(self) -> None:
        x = AgentState(3, 1)
        for _ in range(4):
            x = step(self.grid, x, Control.RIGHT)
        self.assertEqual(x, AgentState(3, 5))
        for _ in range(4):
            x = step(self.grid, x, Control.LEFT)
        self.assertEqual(x, AgentState(3, 1))

    def test_step_never_leaves_grid(self) -> None:
        grid = generate_environment(3, GridParams(width=8, height=8))
        for r in range(grid.height):
            for c in range(grid.width):
                for u in Control:
                    nxt = step(grid, AgentState(r, c), u)
                    self.assertTrue(grid.in_bounds(nxt))

    def test_control_between_adjacent_cells(self) -> None:
        self.assertEqual(control_between(AgentState(1, 1), AgentState(1, 2)), Control.RIGHT)
        with self.assertRaises(InvalidStateError):
            control_between(AgentState(1, 1), AgentState(2, 2))


class ExpertTests(SimpleTestCase):
    def test_start_equals_goal(self) -> None:
        grid = grid_from_rows(open_room(6))
        demo = generate_demonstration(grid, AgentState(2, 2), AgentState(2, 2), SMALL_SENSOR)
        self.assertIsInstance(demo, Demonstration)
        self.assertEqual(demo.length, 0)
        self.assertTrue(demo.is_consistent())

    def test_open_room_path_is_manhattan(self) -> None:
        grid = grid_from_rows(open_room(6))
        demo = generate_demonstration(grid, AgentState(1, 1), AgentState(1, 4), SMALL_SENSOR)
        self.assertEqual(demo.length, 3)
        self.assertEqual(demo.controls(), [Control.RIGHT] * 3)

    def test_prefers_lawn_corridor_over_lava(self) -> None:
        grid = grid_from_rows(
            [
                "#######",
                "#.LLL.#",
                "#.###.#",
                "#.ggg.#",
                "#######",
            ]
        )
        demo = generate_demonstration(grid, AgentState(1, 1), AgentState(1, 5), SMALL_SENSOR)
        states = demo.states()
        for cell in (AgentState(3, 2), AgentState(3, 3), AgentState(3, 4)):
            self.assertIn(cell, states)
        self.assertAlmostEqual(demo.path_cost(), 6.5)

    def test_replay_reproduces_states_and_scans_are_recorded(self) -> None:
        demo = sample_episode(11, GridParams(width=8, height=8), sensor_params=SMALL_SENSOR)
        self.assertIsInstance(demo, Demonstration)
        self.assertTrue(demo.is_consistent())
        self.assertEqual(demo.replay()[-1], demo.goal)
        for recorded in demo.steps:
            self.assertEqual(recorded.scan.origin, recorded.state)
            self.assertEqual(len(recorded.scan), SMALL_SENSOR.ray_count)

    def test_expert_is_optimal_on_small_grids(self) -> None:
        params = GridParams(width=6, height=6, rect_count=(1, 3), rect_size=(1, 2))
        checked = 0
        for seed in range(25):
            grid = generate_environment(seed, params)
            pair = sample_start_goal(grid, np.random.default_rng(seed), min_separation=1)
            if pair is None:
                continue
            start, goal = pair
            oracle = exhaustive_cost_to_go(grid, goal)
            outcome = generate_demonstration(grid, start, goal, SMALL_SENSOR)
            if math.isinf(oracle[start.row, start.col]):
                self.assertIsInstance(outcome, InfeasibleDemonstration)
                continue
            self.assertAlmostEqual(outcome.path_cost(), oracle[start.row, start.col], places=9)
            checked += 1
        self.assertGreater(checked, 5)

    def test_walled_off_goal_is_infeasible(self) -> None:
        grid = grid_from_rows(
            [
                "######",
                "#..#.#",
                "#..#.#",
                "######",
            ]
        )
        outcome = generate_demonstration(grid, AgentState(1, 1), AgentState(1, 4), SMALL_SENSOR)
        self.assertIsInstance(outcome, InfeasibleDemonstration)

    def test_non_free_endpoints_rejected(self) -> None:
        grid = grid_from_rows(["#####", "#.g.#", "#####"])
        with self.assertRaises(InvalidStateError):
            generate_demonstration(grid, AgentState(1, 2), AgentState(1, 1), SMALL_SENSOR)
        with self.assertRaises(InvalidStateError):
            generate_demonstration(grid, AgentState(0, 0), AgentState(1, 1), SMALL_SENSOR)


class EpisodeTests(SimpleTestCase):
    def test_split_is_deterministic(self) -> None:
        params = GridParams(width=8, height=8)
        first = generate_split("val", 3, base_seed=4, grid_params=params, sensor_params=SMALL_SENSOR)
        second = generate_split("val", 3, base_seed=4, grid_params=params, sensor_params=SMALL_SENSOR)
        self.assertEqual(first, second)

    def test_splits_use_disjoint_seeds(self) -> None:
        params = GridParams(width=8, height=8)
        train = generate_split("train", 3, grid_params=params, sensor_params=SMALL_SENSOR)
        test = generate_split("test", 3, grid_params=params, sensor_params=SMALL_SENSOR)
        self.assertFalse({d.grid_seed for d in train} & {d.grid_seed for d in test})

    def test_start_goal_separation(self) -> None:
        demo = sample_episode(5, sensor_params=SMALL_SENSOR)
        if isinstance(demo, Demonstration):
            gap = abs(demo.start.row - demo.goal.row) + abs(demo.start.col - demo.goal.col)
            self.assertGreaterEqual(gap, 8)


class DatasetTests(SimpleTestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.params = GridParams(width=8, height=8)
        self.demos = generate_split("train", 2, grid_params=self.params, sensor_params=SMALL_SENSOR)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_round_trip(self) -> None:
        path = save_dataset(self.demos, self.tmp / "train.json", grid_params=self.params, sensor_params=SMALL_SENSOR)
        loaded = load_dataset(path)
        self.assertEqual(list(loaded.demonstrations), self.demos)
        self.assertEqual(loaded.grid_params, self.params)
        self.assertEqual(loaded.sensor_params, SMALL_SENSOR)

    def test_empty_round_trip(self) -> None:
        loaded = load_dataset(save_dataset([], self.tmp / "empty.json"))
        self.assertEqual(len(loaded), 0)

    def test_truncated_file_is_schema_error(self) -> None:
        path = save_dataset(self.demos, self.tmp / "train.json")
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with self.assertRaises(DatasetSchemaError):
            load_dataset(path)

    def test_version_mismatch(self) -> None:
        path = save_dataset(self.demos, self.tmp / "train.json")
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with self.assertRaises(SchemaVersionError):
            load_dataset(path)

    def test_tampered_grid_disagrees_with_seed(self) -> None:
        path = save_dataset(self.demos, self.tmp / "train.json", grid_params=self.params)
        payload = json.loads(path.read_text())
        cells = payload["demonstrations"][0]["cells"]
        cells[0] = 0
        path.write_text(json.dumps(payload))
        with self.assertRaises(DatasetSchemaError):
            load_dataset(path)

    def test_saving_twice_is_byte_identical(self) -> None:
        a = save_dataset(self.demos, self.tmp / "a.json", grid_params=self.params)
        b = save_dataset(self.demos, self.tmp / "b.json", grid_params=self.params)
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_repository_limits_split(self) -> None:
        save_dataset(self.demos, self.tmp / "train.json", split="train")
        repo = DatasetRepository(self.tmp)
        self.assertTrue(repo.exists("train"))
        self.assertEqual(len(repo.split("train", limit=1)), 1)
        self.assertEqual(len(repo.split("train")), 2)


class RenderingTests(SimpleTestCase):
    def test_ppm_round_trip(self) -> None:
        grid = generate_environment(0, GridParams(width=8, height=8))
        image = class_image(grid.cells, DEFAULT_CLASS_SET)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_ppm(Path(tmp) / "grid.ppm", image)
            self.assertTrue(path.read_bytes().startswith(b"P6\n8 8\n255\n"))
            np.testing.assert_array_equal(read_ppm(path), image)

    def test_malformed_images_rejected(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ImageFormatError):
                write_ppm(Path(tmp) / "flat.ppm", np.zeros((4, 4)))
            bogus = Path(tmp) / "bogus.ppm"
            bogus.write_bytes(b"P5\n1 1\n255\n\x00")
            with self.assertRaises(ImageFormatError):
                read_ppm(bogus)

    def test_heatmap_marks_non_finite(self) -> None:
        image = heatmap(np.array([[0.0, 1.0], [math.inf, 0.5]]))
        self.assertEqual(tuple(image[0, 0]), (0, 0, 0))
        self.assertEqual(tuple(image[0, 1]), (255, 255, 255))
        self.assertEqual(tuple(image[1, 0]), (200, 0, 0))
