"""
metrics/tests.py
================
Tests for NLL, accuracy, success rate and modified Hausdorff distance.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from metrics.services import (
    EmptyTrajectoryError,
    EpisodeOutcome,
    LengthMismatchError,
    MetricSummary,
    accuracy,
    mhd,
    modified_hausdorff,
    nll,
    tsr,
    write_history_csv,
    write_results_csv,
)

UNIFORM = np.full(4, 0.25)


class NllTests(SimpleTestCase):
    def test_uniform_policies_give_ln4(self) -> None:
        self.assertAlmostEqual(nll([UNIFORM] * 5, [0, 1, 2, 3, 0]), math.log(4))

    def test_certain_policies_give_zero(self) -> None:
        self.assertEqual(nll([np.eye(4)[2], np.eye(4)[0]], [2, 0]), 0.0)

    def test_mean_over_steps(self) -> None:
        policies = [np.array([0.5, 0.5, 0.0, 0.0]), UNIFORM]
        self.assertAlmostEqual(nll(policies, [0, 3]), 1.0397, places=4)

    def test_zero_probability_is_infinite_unless_clamped(self) -> None:
        policies = [np.eye(4)[0]]
        self.assertEqual(nll(policies, [1]), math.inf)
        self.assertEqual(nll(policies, [1], clamp=50.0), 50.0)

    def test_length_mismatch(self) -> None:
        with self.assertRaises(LengthMismatchError):
            nll([UNIFORM], [0, 1])


class AccuracyTests(SimpleTestCase):
    def test_always_and_never_correct(self) -> None:
        policies = [np.eye(4)[u] for u in (0, 1, 2)]
        self.assertEqual(accuracy(policies, [0, 1, 2]), 1.0)
        self.assertEqual(accuracy(policies, [1, 2, 3]), 0.0)

    def test_three_of_four(self) -> None:
        policies = [np.eye(4)[u] for u in (0, 1, 2, 3)]
        self.assertEqual(accuracy(policies, [0, 1, 2, 0]), 0.75)

    def test_ties_go_to_the_earliest_control(self) -> None:
        tied = np.array([0.1, 0.4, 0.4, 0.1])
        self.assertEqual(accuracy([tied], [1]), 1.0)
        self.assertEqual(accuracy([tied], [2]), 0.0)

    def test_length_mismatch(self) -> None:
        with self.assertRaises(LengthMismatchError):
            accuracy([UNIFORM, UNIFORM], [0])


class TsrTests(SimpleTestCase):
    def test_all_succeed(self) -> None:
        self.assertEqual(tsr([EpisodeOutcome(True, 5, 5)] * 3), 1.0)

    def test_twice_the_expert_length_is_a_success(self) -> None:
        self.assertTrue(EpisodeOutcome(True, 10, 5).succeeded)
        self.assertFalse(EpisodeOutcome(True, 11, 5).succeeded)
        self.assertFalse(EpisodeOutcome(False, 3, 5).succeeded)

    def test_fraction(self) -> None:
        outcomes = [EpisodeOutcome(True, 4, 4)] * 93 + [EpisodeOutcome(False, 8, 4)] * 7
        self.assertAlmostEqual(tsr(outcomes), 0.93)

    def test_no_episodes(self) -> None:
        self.assertTrue(math.isnan(tsr([])))


class MhdTests(SimpleTestCase):
    def test_identical_trajectories(self) -> None:
        path = [(1, 1), (1, 2), (2, 2)]
        self.assertEqual(modified_hausdorff(path, path), 0.0)

    def test_single_points(self) -> None:
        self.assertEqual(modified_hausdorff([(0, 0)], [(0, 3)]), 3.0)

    def test_parallel_segments(self) -> None:
        self.assertEqual(modified_hausdorff([(0, 0), (0, 1)], [(1, 0), (1, 1)]), 1.0)

    def test_symmetry_and_non_negativity(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = [tuple(p) for p in rng.integers(0, 10, size=(int(rng.integers(1, 8)), 2))]
            e = [tuple(p) for p in rng.integers(0, 10, size=(int(rng.integers(1, 8)), 2))]
            self.assertEqual(modified_hausdorff(a, e), modified_hausdorff(e, a))
            self.assertGreaterEqual(modified_hausdorff(a, e), 0.0)

    def test_mean_over_pairs(self) -> None:
        value = mhd([[(0, 0)], [(0, 0), (0, 1)]], [[(0, 3)], [(1, 0), (1, 1)]])
        self.assertEqual(value, 2.0)

    def test_empty_trajectory(self) -> None:
        with self.assertRaises(EmptyTrajectoryError):
            modified_hausdorff([], [(0, 0)])

    def test_length_mismatch(self) -> None:
        with self.assertRaises(LengthMismatchError):
            mhd([[(0, 0)]], [])


class ExportTests(SimpleTestCase):
    def test_results_csv_has_table_columns(self) -> None:
        summary = MetricSummary("test", 0.3, 0.9, 0.93, 0.4, 100, 1200)
        with tempfile.TemporaryDirectory() as tmp:
            frame = pd.read_csv(write_results_csv(Path(tmp) / "results.csv", [summary]))
        self.assertEqual(list(frame.columns), ["split", "nll", "accuracy", "tsr", "mhd", "episodes", "steps"])
        self.assertEqual(frame.loc[0, "tsr"], 0.93)

    def test_history_csv(self) -> None:
        history = [
            {"epoch": 1, "split": "train", "nll": 1.2, "accuracy": 0.5},
            {"epoch": 1, "split": "val", "nll": 1.3, "accuracy": 0.4},
        ]
        with tempfile.TemporaryDirectory() as tmp:
            frame = pd.read_csv(write_history_csv(Path(tmp) / "history.csv", history))
        self.assertEqual(len(frame), 2)
        self.assertEqual(list(frame["split"]), ["train", "val"])
