"""
sensor/tests.py
===============
Tests for supercover ray traversal and the semantic lidar.
"""

from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase

from gridworld.services import DEFAULT_CLASS_SET, AgentState, GridParams, generate_environment, grid_from_rows
from sensor.services import (
    InvalidScanOriginError,
    InvalidSensorParamsError,
    SensorParams,
    ray_cells,
    scan,
    trace_ray,
)


def segment_square_oracle(origin: tuple[int, int], angle: float, max_range: float) -> list[tuple[int, int]]:
    """Every cell whose closed square meets the segment, by slab intersection."""
    d_row = -math.sin(math.radians(angle))
    d_col = math.cos(math.radians(angle))
    d_row = 0.0 if abs(d_row) < 1e-12 else d_row
    d_col = 0.0 if abs(d_col) < 1e-12 else d_col
    r0, c0 = origin
    reach = int(math.ceil(max_range)) + 1
    hits: list[tuple[float, int, int]] = []
    for r in range(r0 - reach, r0 + reach + 1):
        for c in range(c0 - reach, c0 + reach + 1):
            if (r, c) == (r0, c0):
                continue
            lo, hi = 0.0, max_range
            inside = True
            for start, direction, centre in ((r0, d_row, r), (c0, d_col, c)):
                if direction == 0.0:
                    if abs(start - centre) > 0.5 + 1e-9:
                        inside = False
                    continue
                t1 = (centre - 0.5 - start) / direction
                t2 = (centre + 0.5 - start) / direction
                lo = max(lo, min(t1, t2))
                hi = min(hi, max(t1, t2))
            if inside and lo <= hi + 1e-9:
                hits.append((round(lo, 6), r, c))
    return [(r, c) for _, r, c in sorted(hits)]


class RayCellsTests(SimpleTestCase):
    def test_axis_aligned_right(self) -> None:
        self.assertEqual(ray_cells((5, 5), 0.0, 3.0), [(5, 6), (5, 7), (5, 8)])

    def test_left_mirrors_right(self) -> None:
        right = ray_cells((5, 5), 0.0, 3.0)
        left = ray_cells((5, 5), 180.0, 3.0)
        self.assertEqual(left, [(r, 10 - c) for r, c in right])

    def test_up_is_negative_row(self) -> None:
        self.assertEqual(ray_cells((5, 5), 90.0, 2.0), [(4, 5), (3, 5)])

    def test_diagonal_matches_oracle(self) -> None:
        self.assertEqual(ray_cells((5, 5), 45.0, 3.0), segment_square_oracle((5, 5), 45.0, 3.0))
        # corner crossings report both side cells before the diagonal one
        self.assertEqual(ray_cells((5, 5), 45.0, 1.0), [(4, 5), (4, 6), (5, 6)])

    def test_all_beam_angles_match_oracle(self) -> None:
        for angle in range(0, 360, 5):
            for max_range in (1.0, 2.5, 3.0, 4.2):
                with self.subTest(angle=angle, max_range=max_range):
                    self.assertEqual(
                        ray_cells((6, 6), float(angle), max_range),
                        segment_square_oracle((6, 6), float(angle), max_range),
                    )

    def test_entries_are_sorted_and_within_range(self) -> None:
        hits = trace_ray((4, 4), 37.0, 3.0)
        entries = [hit.entry for hit in hits]
        self.assertEqual(entries, sorted(entries))
        self.assertTrue(all(0 < e <= 3.0 + 1e-9 for e in entries))

    def test_union_covers_chebyshev_neighbourhood(self) -> None:
        covered = set()
        for angle in SensorParams().angles():
            covered.update(ray_cells((5, 5), angle, 3.0))
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if (dr, dc) != (0, 0):
                    self.assertIn((5 + dr, 5 + dc), covered)


class ScanTests(SimpleTestCase):
    def test_enclosed_agent_hits_adjacent_walls(self) -> None:
        grid = grid_from_rows(["#####", "#####", "##.##", "#####", "#####"])
        cloud = scan(grid, AgentState(2, 2))
        self.assertEqual(len(cloud), 72)
        wall = DEFAULT_CLASS_SET.wall
        for point in cloud:
            self.assertLessEqual(max(abs(point.cell.row - 2), abs(point.cell.col - 2)), 1)
            self.assertEqual(point.weights[wall - 1], 1.0)
            self.assertLessEqual(point.range_from((2, 2)), math.sqrt(2) / 2 + 1e-9)

    def test_open_room_returns_free_at_range(self) -> None:
        rows = ["#" * 11] + ["#" + "." * 9 + "#"] * 9 + ["#" * 11]
        cloud = scan(grid_from_rows(rows), AgentState(5, 5))
        for point in cloud:
            self.assertTrue(point.is_free)
            self.assertAlmostEqual(point.range_from((5, 5)), 3.0)
            np.testing.assert_array_equal(point.augmented(), np.zeros(4))

    def test_labels_match_true_classes(self) -> None:
        grid = generate_environment(3)
        origin = grid.free_cells()[len(grid.free_cells()) // 2]
        cloud = scan(grid, origin)
        for point in cloud:
            self.assertLessEqual(point.range_from(origin), 3.0 + 1e-9)
            if point.is_free:
                continue
            self.assertAlmostEqual(sum(point.weights), 1.0)
            self.assertEqual(int(np.argmax(point.weights)) + 1, grid.class_at(point.cell))

    def test_semantic_hits_on_lawn_and_lava(self) -> None:
        grid = grid_from_rows(
            [
                "#######",
                "#.....#",
                "#.L.g.#",
                "#.....#",
                "#######",
            ]
        )
        cloud = scan(grid, AgentState(2, 3), SensorParams(ray_count=4, angular_resolution=90.0, max_range=3.0))
        by_angle = {point.angle: point for point in cloud}
        self.assertEqual(by_angle[0.0].cell, AgentState(2, 4))
        self.assertEqual(by_angle[0.0].weights, (0.0, 0.0, 1.0))
        self.assertEqual(by_angle[180.0].cell, AgentState(2, 2))
        self.assertEqual(by_angle[180.0].weights, (0.0, 1.0, 0.0))
        self.assertEqual(by_angle[0.0].position, (2.0, 3.5))

    def test_scan_from_wall_rejected(self) -> None:
        grid = generate_environment(0, GridParams(width=8, height=8))
        with self.assertRaises(InvalidScanOriginError):
            scan(grid, AgentState(0, 0))

    def test_scan_is_deterministic(self) -> None:
        grid = generate_environment(9)
        origin = grid.free_cells()[0]
        self.assertEqual(scan(grid, origin), scan(grid, origin))

    def test_bad_params(self) -> None:
        with self.assertRaises(InvalidSensorParamsError):
            SensorParams(ray_count=0)
