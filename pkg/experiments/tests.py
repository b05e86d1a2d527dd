"""
experiments/tests.py
====================
Tests for run configuration, the pipeline commands and the run registry.
"""

from __future__ import annotations

import json
import math
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from experiments.models import EpochMetricModel, ExperimentRunModel
from costnet.services import EncoderConfig
from experiments.services import (
    BENCH_METHODS,
    RESOLVED_CONFIG_FILE,
    TIMING_COLUMNS,
    ConfigurationError,
    deep_merge,
    evaluate_demonstrations,
    resolve_run_config,
    run_benchmark,
)
from gridworld.services import GridParams
from gridworld.services.dataset import load_dataset
from gridworld.services.episodes import generate_split
from gridworld.services.rendering import read_ppm
from learner.services import LearnedCostStrategy, NavigationModel, OracleCostStrategy, TrainConfig, train
from metrics.services import RESULT_COLUMNS
from sensor.services import SensorParams

TINY: dict = {
    "grid": {"size": 8, "rect_count": [1, 2], "rect_size": [1, 2]},
    "data": {"train": 3, "val": 2, "test": 2},
    "sensor": {"ray_count": 8, "angular_resolution": 45.0, "max_range": 2.0},
    "model": {"channels": [3, 4]},
    "train": {"epochs": 1, "batch_size": 2},
    "bench": {"sizes": [8], "steps": 3, "repeats": 2},
    "inspect": {"episode": 0, "steps": [0, 1]},
    "policy_lab": {"size": 6},
}


def write_config(directory: Path, data: dict, name: str = "cfg.json") -> Path:
    path = directory / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TempDirMixin:
    def make_tmp(self) -> Path:
        path = Path(tempfile.mkdtemp(prefix="semnav-test-"))
        self.addCleanup(shutil.rmtree, path, True)
        return path


# ──────────────────────────────────────────────
# Configuration
# ──────────────────────────────────────────────


class RunConfigTests(TempDirMixin, SimpleTestCase):
    def test_defaults_without_file_or_flags(self):
        config = resolve_run_config("train")
        self.assertEqual(config.section("train")["epochs"], 30)
        self.assertEqual(config.grid_params().width, 16)
        self.assertEqual(config.grid_params().height, 16)
        self.assertEqual(config.sensor_params().ray_count, 72)

    def test_file_overrides_defaults_and_flags_override_file(self):
        tmp = self.make_tmp()
        path = write_config(tmp, {"seed": 4, "train": {"epochs": 5, "lr": 0.01}, "grid": {"size": 10}})
        config = resolve_run_config("train", path, {"epochs": 2, "grid_size": 12, "alpha": None})
        self.assertEqual(config.seed, 4)
        self.assertEqual(config.section("train")["epochs"], 2)
        self.assertEqual(config.section("train")["lr"], 0.01)
        self.assertEqual(config.section("train")["alpha"], 1.0)
        self.assertEqual(config.grid_params().width, 12)
        # untouched siblings survive the merge
        self.assertEqual(config.section("train")["batch_size"], 8)

    def test_flag_paths(self):
        config = resolve_run_config("eval", None, {"checkpoint": "best.json", "episodes": 7, "out": "x"})
        self.assertEqual(config.section("eval")["checkpoint"], "best.json")
        self.assertEqual(config.episode_cap(), 7)
        self.assertEqual(str(config.out), "x")

    def test_unknown_key_is_rejected(self):
        with self.assertRaises(ConfigurationError) as ctx:
            deep_merge({"train": {"epochs": 1}}, {"train": {"epoch": 2}})
        self.assertEqual(ctx.exception.key, "train.epoch")

    def test_scalar_for_section_is_rejected(self):
        with self.assertRaises(ConfigurationError):
            deep_merge({"train": {"epochs": 1}}, {"train": 3})

    def test_missing_and_malformed_files(self):
        tmp = self.make_tmp()
        with self.assertRaises(ConfigurationError):
            resolve_run_config("train", tmp / "absent.json")
        bad = tmp / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with self.assertRaises(ConfigurationError):
            resolve_run_config("train", bad)
        listed = write_config(tmp, [1, 2], name="list.json")
        with self.assertRaises(ConfigurationError):
            resolve_run_config("train", listed)

    def test_invalid_values_surface_as_configuration_errors(self):
        tmp = self.make_tmp()
        path = write_config(tmp, {"model": {"encoder": "transformer"}})
        with self.assertRaises(ConfigurationError):
            resolve_run_config("train", path).encoder_config()
        with self.assertRaises(ConfigurationError):
            resolve_run_config("train", None, {"lr": -1.0}).train_config()

    def test_write_resolved_config(self):
        tmp = self.make_tmp()
        config = resolve_run_config("gen_data", None, {"seed": 3})
        path = config.write(tmp / "run")
        self.assertEqual(path.name, RESOLVED_CONFIG_FILE)
        stored = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(stored["command"], "gen_data")
        self.assertEqual(stored["seed"], 3)
        self.assertIn("policy_lab", stored)


# ──────────────────────────────────────────────
# Benchmark and held-out evaluation
# ──────────────────────────────────────────────

SMALL_SENSOR = SensorParams(ray_count=8, angular_resolution=45.0, max_range=2.0)
SMALL_ROOMS = GridParams(width=8, height=8, rect_count=(1, 2), rect_size=(1, 2))


class BenchmarkTests(SimpleTestCase):
    def test_astar_is_faster_than_soft_value_iteration(self):
        methods = (BENCH_METHODS[0], BENCH_METHODS[2])
        rows = run_benchmark(
            OracleCostStrategy(4),
            sizes=[24],
            steps=3,
            repeats=1,
            seed=0,
            grid_params=GridParams(rect_count=(2, 4), rect_size=(2, 4)),
            sensor_params=SMALL_SENSOR,
            methods=methods,
        )
        timings = {row.method: row.mean_ms for row in rows}
        self.assertEqual(set(timings), {"astar", "maxent_vi"})
        # one backward search against H*W soft sweeps of the whole table
        self.assertLess(timings["astar"], timings["maxent_vi"])


class GeneralisationTests(SimpleTestCase):
    def test_training_beats_uniform_policy_on_unseen_episodes(self):
        train_demos = generate_split("train", 6, 0, SMALL_ROOMS, sensor_params=SMALL_SENSOR)
        val_demos = generate_split("val", 3, 0, SMALL_ROOMS, sensor_params=SMALL_SENSOR)
        model = NavigationModel.from_config(EncoderConfig(channels=(4, 4), seed=1), psi_init=1.0, seed=1)
        train(train_demos, TrainConfig(epochs=20, batch_size=2, lr=0.02, seed=1), model, val=val_demos)

        summary, reports = evaluate_demonstrations("val", val_demos, LearnedCostStrategy(model), SMALL_SENSOR)
        self.assertEqual(summary.episodes, 3)
        self.assertEqual(len(reports), 3)
        self.assertLess(summary.nll, math.log(4))
        self.assertGreater(summary.tsr, 0.0)


# ──────────────────────────────────────────────
# Commands
# ──────────────────────────────────────────────


class PipelineCommandTests(TempDirMixin, TestCase):
    def setUp(self):
        self.tmp = self.make_tmp()
        self.data_dir = self.tmp / "data"
        self.config_path = write_config(self.tmp, {**TINY, "data": {**TINY["data"], "dir": str(self.data_dir)}})

    def call(self, name: str, **options) -> str:
        out = StringIO()
        call_command(name, config=str(self.config_path), stdout=out, **options)
        return out.getvalue()

    def generate(self) -> None:
        self.call("gen_data", out=str(self.data_dir), seed=0)

    def test_gen_data_writes_splits_and_registers_run(self):
        self.call("gen_data", out=str(self.data_dir), seed=0, episodes=2)
        for split, expected in (("train", 2), ("val", 2), ("test", 2)):
            dataset = load_dataset(self.data_dir / f"{split}.json")
            self.assertEqual(len(dataset), expected)
            self.assertEqual(dataset.split, split)
            self.assertTrue(all(d.is_consistent() for d in dataset))
        self.assertTrue((self.data_dir / RESOLVED_CONFIG_FILE).is_file())
        run = ExperimentRunModel.objects.get()
        self.assertEqual(run.command, "gen_data")
        self.assertEqual(run.status, ExperimentRunModel.Status.COMPLETED)
        self.assertEqual(run.summary["counts"], {"train": 2, "val": 2, "test": 2})
        self.assertIsNotNone(run.finished_at)

    def test_gen_data_is_deterministic(self):
        self.call("gen_data", out=str(self.tmp / "a"), seed=5)
        self.call("gen_data", out=str(self.tmp / "b"), seed=5)
        for split in ("train", "val", "test"):
            self.assertEqual(
                (self.tmp / "a" / f"{split}.json").read_bytes(),
                (self.tmp / "b" / f"{split}.json").read_bytes(),
            )

    def test_train_with_zero_epochs_saves_initial_checkpoint(self):
        self.generate()
        run_dir = self.tmp / "train0"
        self.call("train", out=str(run_dir), epochs=0)
        self.assertTrue((run_dir / "best.json").is_file())
        self.assertTrue((run_dir / "last.json").is_file())
        self.assertEqual(EpochMetricModel.objects.count(), 0)
        run = ExperimentRunModel.objects.get(command="train")
        self.assertIsNone(run.summary["best_epoch"])

    def test_train_records_history_and_epoch_metrics(self):
        self.generate()
        run_dir = self.tmp / "train1"
        self.call("train", out=str(run_dir), epochs=1)
        history = pd.read_csv(run_dir / "history.csv")
        self.assertEqual(list(history.columns), ["epoch", "split", "nll", "accuracy"])
        self.assertEqual(sorted(history["split"]), ["train", "val"])
        run = ExperimentRunModel.objects.get(command="train")
        metrics = run.epoch_metrics.order_by("split")
        self.assertEqual([m.split for m in metrics], ["train", "val"])
        self.assertTrue(all(m.epoch == 1 for m in metrics))
        self.assertTrue(all(m.nll is not None and math.isfinite(m.nll) for m in metrics))
        self.assertEqual(run.summary["best_epoch"], 1)

    def test_resumed_training_continues_the_epoch_count(self):
        self.generate()
        first = self.tmp / "first"
        self.call("train", out=str(first), epochs=1)
        resume_cfg = write_config(
            self.tmp,
            {**TINY, "data": {**TINY["data"], "dir": str(self.data_dir)}, "train": {**TINY["train"], "resume": str(first / "last.json")}},
            name="resume.json",
        )
        out = StringIO()
        call_command("train", config=str(resume_cfg), out=str(first), epochs=2, stdout=out)
        history = pd.read_csv(first / "history.csv")
        self.assertEqual(sorted(set(history["epoch"])), [1, 2])
        self.assertEqual(ExperimentRunModel.objects.filter(command="train").order_by("-pk").first().summary["epochs"], 2)

    def test_train_without_data_fails_and_marks_run(self):
        with self.assertRaises(CommandError):
            self.call("train", out=str(self.tmp / "nodata"))
        run = ExperimentRunModel.objects.get(command="train")
        self.assertEqual(run.status, ExperimentRunModel.Status.FAILED)
        self.assertIn("train", run.error_message)

    def test_unknown_config_key_fails(self):
        bad = write_config(self.tmp, {"trian": {}}, name="bad.json")
        with self.assertRaises(CommandError):
            call_command("gen_data", config=str(bad), out=str(self.tmp / "x"), stdout=StringIO())
        self.assertEqual(ExperimentRunModel.objects.count(), 0)

    def test_eval_with_oracle_costs_succeeds_everywhere(self):
        self.generate()
        oracle_cfg = write_config(
            self.tmp,
            {**TINY, "data": {**TINY["data"], "dir": str(self.data_dir)}, "eval": {"oracle": True}},
            name="oracle.json",
        )
        run_dir = self.tmp / "oracle"
        call_command("eval", config=str(oracle_cfg), out=str(run_dir), stdout=StringIO())
        results = pd.read_csv(run_dir / "results.csv")
        self.assertEqual(list(results.columns), RESULT_COLUMNS)
        self.assertEqual(list(results["split"]), ["val", "test"])
        self.assertTrue(np.all(results["tsr"] == 1.0))
        episodes = json.loads((run_dir / "episodes.json").read_text(encoding="utf-8"))
        self.assertEqual(len(episodes), 4)
        self.assertTrue(all(e["reached"] for e in episodes))

    def test_eval_untrained_model_populates_all_metrics(self):
        self.generate()
        run_dir = self.tmp / "eval"
        self.call("eval", out=str(run_dir))
        results = pd.read_csv(run_dir / "results.csv")
        for column in ("nll", "accuracy", "tsr", "mhd"):
            self.assertFalse(results[column].isna().any(), column)
        self.assertTrue(((results["accuracy"] >= 0) & (results["accuracy"] <= 1)).all())
        run = ExperimentRunModel.objects.get(command="eval")
        self.assertEqual(run.summary["strategy"], "learned")

    def test_eval_with_trained_checkpoint_and_maxent_planner(self):
        self.generate()
        self.call("train", out=str(self.tmp / "t"), epochs=1)
        maxent_cfg = write_config(
            self.tmp,
            {**TINY, "data": {**TINY["data"], "dir": str(self.data_dir)}, "eval": {"planner": "maxent"}},
            name="maxent.json",
        )
        run_dir = self.tmp / "maxent"
        call_command(
            "eval",
            config=str(maxent_cfg),
            out=str(run_dir),
            checkpoint=str(self.tmp / "t" / "best.json"),
            stdout=StringIO(),
        )
        run = ExperimentRunModel.objects.get(command="eval")
        self.assertEqual(run.summary["planner"], "maxent")
        self.assertEqual(run.config["eval"]["checkpoint"], str(self.tmp / "t" / "best.json"))
        self.assertTrue((run_dir / "results.csv").is_file())

    def test_bench_writes_timing_table(self):
        run_dir = self.tmp / "bench"
        self.call("bench", out=str(run_dir))
        timings = pd.read_csv(run_dir / "timings.csv")
        self.assertEqual(list(timings.columns), TIMING_COLUMNS)
        self.assertEqual(list(timings["method"]), ["astar", "weighted_astar", "maxent_vi"])
        self.assertTrue((timings["grid_size"] == 8).all())
        self.assertTrue((timings["steps"] == 3).all())
        self.assertTrue((timings["mean_ms"] > 0).all())
        self.assertTrue((timings["std_ms"] >= 0).all())

    def test_inspect_writes_step_images(self):
        self.generate()
        run_dir = self.tmp / "inspect"
        self.call("inspect", out=str(run_dir))
        for k in range(4):
            prior = read_ppm(run_dir / "prior" / f"class_{k}.ppm")
            # the empty map has the same posterior everywhere
            self.assertEqual(len(np.unique(prior.reshape(-1, 3), axis=0)), 1)
        for t in (0, 1):
            step_dir = run_dir / f"step_{t}"
            self.assertEqual(read_ppm(step_dir / "cost.ppm").shape, (64, 64, 3))
            for label in ("up", "down", "left", "right"):
                self.assertTrue((step_dir / f"subgradient_{label}.ppm").is_file())
            trace = json.loads((step_dir / "search_trace.json").read_text(encoding="utf-8"))
            self.assertEqual(len(trace["expansion_order"]), len(trace["g_values"]))
            self.assertEqual(trace["g_values"][0], 0.0)
            self.assertTrue((step_dir / "map_snapshot.csv").is_file())
        self.assertTrue((run_dir / "rollout.ppm").is_file())
        self.assertTrue((run_dir / "point_counts.ppm").is_file())

    def test_inspect_rejects_episode_outside_split(self):
        self.generate()
        far = write_config(
            self.tmp,
            {**TINY, "data": {**TINY["data"], "dir": str(self.data_dir)}, "inspect": {"episode": 99}},
            name="far.json",
        )
        with self.assertRaises(CommandError):
            call_command("inspect", config=str(far), out=str(self.tmp / "far"), stdout=StringIO())

    def test_policy_lab_writes_panels_and_summary(self):
        run_dir = self.tmp / "lab"
        output = self.call("policy_lab", out=str(run_dir))
        for name in ("value_hard", "value_soft", "policy_hard", "policy_soft"):
            self.assertTrue((run_dir / f"{name}.ppm").is_file())
        row = pd.read_csv(run_dir / "comparison.csv").iloc[0]
        self.assertTrue(bool(row["soft_below_hard"]))
        self.assertTrue(bool(row["hard_reaches_goal"]))
        self.assertTrue(bool(row["soft_reaches_goal"]))
        self.assertIn("finished", output)
        run = ExperimentRunModel.objects.get(command="policy_lab")
        self.assertTrue(run.summary["soft_below_hard"])
