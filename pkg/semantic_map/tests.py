"""
semantic_map/tests.py
=====================
Tests for the log-odds map encoder, its evidence and its gradients.
"""

from __future__ import annotations

import math
import random
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from gridworld.services import DEFAULT_CLASS_SET, AgentState, generate_environment, grid_from_rows
from semantic_map.services import (
    InvalidPriorError,
    InverseModelParams,
    LogOddsGradient,
    LogOddsMap,
    MapGradients,
    SemanticMapError,
    SparsityMismatchError,
    backprop_to_psi,
    delta_p,
    inverse_logodds,
    posterior,
    posterior_grid,
    update,
)
from semantic_map.services.export import argmax_image, map_snapshot_frame, point_counts, write_map_snapshot
from sensor.services import LabeledPoint, PointCloud, SensorParams, scan

K1 = DEFAULT_CLASS_SET.count


def wall_ahead_grid():
    # agent at (2, 1), wall straight ahead at (2, 5)
    return grid_from_rows(
        [
            "#######",
            "#.....#",
            "#....##",
            "#.....#",
            "#######",
        ]
    )


class DeltaPTests(SimpleTestCase):
    def test_hit_cell_centre_is_zero(self) -> None:
        self.assertEqual(delta_p((5, 5), (5.0, 8.0), (5, 8)), 0.0)

    def test_one_cell_before_endpoint(self) -> None:
        self.assertAlmostEqual(delta_p((5, 5), (5.0, 8.0), (5, 7)), -1.0)


class InverseLogOddsTests(SimpleTestCase):
    def setUp(self) -> None:
        self.x = AgentState(5, 5)
        self.point = LabeledPoint(cell=AgentState(5, 8), position=(5.0, 8.0), weights=(0.0, 1.0, 0.0), angle=0.0)

    def test_zero_psi_gives_zero(self) -> None:
        params = InverseModelParams(psi=np.zeros((K1, K1)))
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (5, 7), params), np.zeros(K1))

    def test_identity_at_zero_delta(self) -> None:
        params = InverseModelParams(psi=np.eye(K1))
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (5, 8), params), np.zeros(K1))

    def test_negative_identity_one_cell_before(self) -> None:
        params = InverseModelParams(psi=-np.eye(K1))
        g = inverse_logodds(self.x, self.point, (5, 7), params)
        np.testing.assert_allclose(g, [0.0, 0.0, 1.0, 0.0], atol=1e-12)

    def test_cells_off_the_ray_get_prior(self) -> None:
        params = InverseModelParams(psi=np.eye(K1))
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (5, 9), params), np.zeros(K1))
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (4, 7), params), np.zeros(K1))

    def test_endpoint_mode(self) -> None:
        params = InverseModelParams(psi=np.eye(K1), update_mode="endpoint")
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (5, 8), params), [0, 0, 1, 0])
        np.testing.assert_array_equal(inverse_logodds(self.x, self.point, (5, 7), params), np.zeros(K1))


class UpdateTests(SimpleTestCase):
    def setUp(self) -> None:
        self.grid = generate_environment(4)
        self.x = self.grid.free_cells()[len(self.grid.free_cells()) // 3]
        self.cloud = scan(self.grid, self.x)
        self.params = InverseModelParams.scaled_identity(K1, 2.0)
        self.empty = LogOddsMap.empty(self.grid.shape, K1)

    def test_empty_cloud_leaves_map_unchanged(self) -> None:
        updated = update(self.empty, self.x, PointCloud(origin=self.x, points=()), self.params)
        self.assertEqual(len(updated), 0)
        self.assertEqual(updated.scans, 0)

    def test_duplicate_point_doubles_increment(self) -> None:
        hit = next(p for p in self.cloud if not p.is_free)
        once = update(self.empty, self.x, PointCloud(self.x, (hit,)), self.params)
        twice = update(self.empty, self.x, PointCloud(self.x, (hit, hit)), self.params)
        np.testing.assert_array_equal(once.cells, twice.cells)
        np.testing.assert_array_equal(twice.logodds, 2.0 * once.logodds)

    def test_single_ray_profile(self) -> None:
        grid = wall_ahead_grid()
        cloud = scan(grid, AgentState(2, 1), SensorParams(ray_count=1, angular_resolution=1.0, max_range=6.0))
        self.assertEqual(cloud.points[0].cell, AgentState(2, 5))
        log_map = update(LogOddsMap.empty(grid.shape, K1), AgentState(2, 1), cloud, self.params)
        wall = DEFAULT_CLASS_SET.wall
        values = [log_map.logodds_at((2, c))[wall] for c in (2, 3, 4, 5)]
        self.assertEqual(values, sorted(values))
        self.assertGreater(values[-1], 0.0)
        self.assertIsNone(log_map.position_of(log_map.flat_index((2, 6))))

    def test_point_order_does_not_matter(self) -> None:
        shuffled = list(self.cloud.points)
        random.Random(0).shuffle(shuffled)
        a = update(self.empty, self.x, self.cloud, self.params)
        b = update(self.empty, self.x, PointCloud(self.x, tuple(shuffled)), self.params)
        np.testing.assert_array_equal(a.cells, b.cells)
        np.testing.assert_array_equal(a.logodds, b.logodds)

    def test_free_component_stays_pinned(self) -> None:
        params = InverseModelParams(psi=np.random.default_rng(0).normal(size=(K1, K1)))
        log_map = self.empty
        for x in self.grid.free_cells()[:5]:
            log_map = update(log_map, x, scan(self.grid, x), params)
        np.testing.assert_array_equal(log_map.logodds[:, 0], 0.0)

    def test_untouched_cells_stay_at_prior(self) -> None:
        log_map = update(self.empty, self.x, self.cloud, self.params)
        far = [(r, c) for r in range(16) for c in range(16) if max(abs(r - self.x.row), abs(c - self.x.col)) > 4]
        for cell in far:
            self.assertFalse(log_map.observed_mask()[cell])
            np.testing.assert_array_equal(log_map.logodds_at(cell), np.zeros(K1))

    def test_origin_mismatch_rejected(self) -> None:
        with self.assertRaises(SemanticMapError):
            update(self.empty, AgentState(self.x.row, self.x.col + 1), self.cloud, self.params)

    def test_invalid_prior(self) -> None:
        with self.assertRaises(InvalidPriorError):
            LogOddsMap.empty((4, 4), K1, prior=np.ones(K1))
        with self.assertRaises(InvalidPriorError):
            LogOddsMap.empty((4, 4), K1, prior=np.zeros(K1 + 1))

    def test_recovers_true_classes(self) -> None:
        grid = generate_environment(21)
        free = grid.free_cells()
        stride = max(1, len(free) // 50)
        log_map = LogOddsMap.empty(grid.shape, K1)
        for x in free[::stride][:50]:
            log_map = update(log_map, x, scan(grid, x), self.params)
        labels = np.argmax(posterior_grid(log_map), axis=0)
        observed = log_map.observed_mask()
        accuracy = float(np.mean(labels[observed] == grid.cells[observed]))
        self.assertGreaterEqual(accuracy, 0.95)

    def test_endpoint_mode_touches_hit_cells_only(self) -> None:
        params = InverseModelParams.scaled_identity(K1, 1.0, update_mode="endpoint")
        log_map = update(self.empty, self.x, self.cloud, params)
        hit_cells = {log_map.flat_index(p.cell) for p in self.cloud}
        self.assertEqual(set(log_map.cells.tolist()), hit_cells)


class PosteriorTests(SimpleTestCase):
    def _map_with(self, h: np.ndarray) -> LogOddsMap:
        base = LogOddsMap.empty((2, 2), K1)
        return LogOddsMap(
            shape=(2, 2),
            class_count=K1,
            prior=base.prior,
            cells=np.array([0]),
            logodds=np.asarray([h], dtype=float),
            evidence=np.zeros((1, K1)),
            counts=np.array([1]),
        )

    def test_uniform(self) -> None:
        np.testing.assert_allclose(posterior(LogOddsMap.empty((2, 2), K1), (0, 0)), [0.25] * 4)

    def test_large_logodds_dominates(self) -> None:
        p = posterior(self._map_with(np.array([0.0, 50.0, 0.0, 0.0])), (0, 0))
        self.assertGreater(p[1], 1 - 1e-12)

    def test_direct_softmax(self) -> None:
        p = posterior(self._map_with(np.array([0.0, math.log(2), math.log(4), 0.0])), (0, 0))
        np.testing.assert_allclose(p, [0.125, 0.25, 0.5, 0.125])

    def test_log_ratio_identity(self) -> None:
        h = np.array([0.0, -1.3, 0.4, 2.2])
        p = posterior(self._map_with(h), (0, 0))
        np.testing.assert_allclose(np.log(p / p[0]), h, atol=1e-12)


class BackpropTests(SimpleTestCase):
    def setUp(self) -> None:
        self.grid = generate_environment(8, None)
        free = self.grid.free_cells()
        self.states = free[:3]
        self.clouds = [scan(self.grid, x) for x in self.states]

    def build(self, psi: np.ndarray) -> LogOddsMap:
        params = InverseModelParams(psi=psi)
        log_map = LogOddsMap.empty(self.grid.shape, K1)
        for x, cloud in zip(self.states, self.clouds):
            log_map = update(log_map, x, cloud, params)
        return log_map

    def test_zero_upstream_leaves_gradient(self) -> None:
        log_map = self.build(np.eye(K1))
        grads = MapGradients.zeros(K1)
        backprop_to_psi(log_map, LogOddsGradient(log_map.cells, np.zeros((len(log_map), K1))), grads)
        np.testing.assert_array_equal(grads.d_psi, 0.0)

    def test_single_term(self) -> None:
        x = AgentState(5, 5)
        point = LabeledPoint(cell=AgentState(5, 8), position=(5.0, 7.5), weights=(0.0, 1.0, 0.0), angle=0.0)
        grid = grid_from_rows(["#" * 11] + ["#" + "." * 9 + "#"] * 9 + ["#" * 11])
        log_map = update(LogOddsMap.empty(grid.shape, K1), x, PointCloud(x, (point,)), InverseModelParams(np.eye(K1)))
        j = log_map.flat_index((5, 7))
        upstream = LogOddsGradient(np.array([j]), np.array([[0.0, 0.0, 1.0, 0.0]]))
        grads = backprop_to_psi(log_map, upstream, MapGradients.zeros(K1))
        expected = np.zeros((K1, K1))
        expected[2] = point.augmented() * delta_p(x, point.position, (5, 7))
        np.testing.assert_allclose(grads.d_psi, expected)

    def test_matches_central_differences(self) -> None:
        rng = np.random.default_rng(3)
        psi = rng.normal(size=(K1, K1))
        base = self.build(psi)
        weights = rng.normal(size=(len(base), K1))

        def loss(matrix: np.ndarray) -> float:
            log_map = self.build(matrix)
            return float(np.sum(weights * log_map.logodds))

        grads = backprop_to_psi(base, LogOddsGradient(base.cells, weights), MapGradients.zeros(K1))
        delta = 1e-6
        for k in range(K1):
            for m in range(K1):
                plus, minus = psi.copy(), psi.copy()
                plus[k, m] += delta
                minus[k, m] -= delta
                numeric = (loss(plus) - loss(minus)) / (2 * delta)
                self.assertLessEqual(
                    abs(numeric - grads.d_psi[k, m]), 1e-5 * max(1.0, abs(numeric)), msg=f"entry {(k, m)}"
                )

    def test_sparsity_mismatch(self) -> None:
        log_map = self.build(np.eye(K1))
        untouched = int(np.setdiff1d(np.arange(log_map.size), log_map.cells)[0])
        with self.assertRaises(SparsityMismatchError):
            backprop_to_psi(log_map, LogOddsGradient(np.array([untouched]), np.ones((1, K1))), MapGradients.zeros(K1))


class ExportTests(SimpleTestCase):
    def test_snapshot_csv_and_images(self) -> None:
        grid = generate_environment(2)
        x = grid.free_cells()[0]
        cloud = scan(grid, x)
        log_map = update(LogOddsMap.empty(grid.shape, K1), x, cloud, InverseModelParams.scaled_identity(K1, 2.0))
        frame = map_snapshot_frame(log_map)
        self.assertEqual(list(frame.columns), ["j", "row", "col", "h0", "h1", "h2", "h3"])
        self.assertEqual(len(frame), len(log_map))
        with tempfile.TemporaryDirectory() as tmp:
            path = write_map_snapshot(log_map, Path(tmp) / "map.csv")
            self.assertEqual(len(pd.read_csv(path)), len(log_map))
        self.assertEqual(argmax_image(log_map, DEFAULT_CLASS_SET, scale=2).shape, (32, 32, 3))
        counts = point_counts([cloud], grid.shape)
        self.assertEqual(int(counts.sum()), sum(1 for p in cloud if not p.is_free))
