"""
experiments/services/experiment_service.py
==========================================
Orchestration of the pipeline commands and their run registry.

Every command goes through :meth:`ExperimentService.run`, which writes the
resolved configuration next to the artifacts, records an
:class:`ExperimentRunModel` and marks it completed or failed.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pandas as pd
from django.utils import timezone

from costnet.services import load_checkpoint
from experiments.models import EpochMetricModel, ExperimentRunModel
from gridworld.services import DEFAULT_CLASS_SET, ClassSet
from gridworld.services.dataset import Dataset, DatasetRepository, save_dataset
from gridworld.services.episodes import generate_split
from learner.services import (
    CostStrategy,
    LearnedCostStrategy,
    NavigationModel,
    OracleCostStrategy,
    Trainer,
)
from metrics.services import HISTORY_COLUMNS, MetricSummary, write_history_csv, write_results_csv
from policy_lab.services import run_policy_lab, write_comparison
from semnav.exceptions import SemNavError

from .benchmark import run_benchmark, write_timings_csv
from .evaluation import evaluate_demonstrations, write_episode_reports
from .exceptions import ConfigurationError, ExperimentError
from .inspection import inspect_episode
from .run_config import RunConfig

logger: logging.Logger = logging.getLogger(__name__)

SPLITS: tuple[str, ...] = ("train", "val", "test")
EVAL_SPLITS: tuple[str, ...] = ("val", "test")


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats by ``None`` so the value fits a JSON column."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


class ExperimentService:
    """Runs one command's pipeline against a resolved configuration.

    Typical usage::

        config = resolve_run_config("train", "cfg.json", {"epochs": 5})
        service = ExperimentService(config)
        summary = service.run(service.train)
    """

    def __init__(self, config: RunConfig, progress: bool = False) -> None:
        self.config: RunConfig = config
        self.progress: bool = progress
        self.run_record: ExperimentRunModel | None = None

    # ──────────────────────────────────────────────
    # Run bookkeeping
    # ──────────────────────────────────────────────

    def run(self, work: Callable[[], dict]) -> dict:
        """Execute ``work`` inside a registered run.

        Returns:
            The summary dict returned by ``work``.

        Raises:
            SemNavError: Domain failures, after the run is marked failed.
            ExperimentError: Wrapping any unexpected exception.
        """
        out: Path = self.config.out
        self.config.write(out)
        self.run_record = ExperimentRunModel.objects.create(
            command=self.config.command,
            seed=self.config.seed,
            output_dir=str(out),
            config=_json_safe(self.config.to_dict()),
        )
        logger.info("run %d: %s into %s", self.run_record.pk, self.config.command, out)
        try:
            summary: dict = work()
        except SemNavError as exc:
            self._persist_result(ExperimentRunModel.Status.FAILED, error=exc.message)
            raise
        except Exception as exc:
            logger.exception("unexpected error in %s", self.config.command)
            self._persist_result(ExperimentRunModel.Status.FAILED, error=str(exc))
            raise ExperimentError(
                message=f"An unexpected error occurred during {self.config.command}.",
                details={"original_error": str(exc)},
            ) from exc
        self._persist_result(ExperimentRunModel.Status.COMPLETED, summary=summary)
        return summary

    def _persist_result(self, status: str, summary: dict | None = None, error: str = "") -> ExperimentRunModel:
        """Close the run record with ``status``."""
        record = self.run_record
        record.status = status
        record.summary = _json_safe(summary or {})
        record.error_message = error
        record.finished_at = timezone.now()
        record.save(update_fields=["status", "summary", "error_message", "finished_at"])
        logger.info("run %d finished: %s", record.pk, status)
        return record

    def _record_epoch(self, epoch: int, rows: list[dict]) -> None:
        if self.run_record is None:
            return
        for row in rows:
            EpochMetricModel.objects.update_or_create(
                run=self.run_record,
                epoch=epoch,
                split=row["split"],
                defaults={"nll": _json_safe(row["nll"]), "accuracy": _json_safe(row["accuracy"])},
            )

    # ──────────────────────────────────────────────
    # Shared helpers
    # ──────────────────────────────────────────────

    def repository(self) -> DatasetRepository:
        return DatasetRepository(self.config.section("data")["dir"])

    def load_split(self, name: str, required: bool = True) -> Dataset | None:
        repo = self.repository()
        if not repo.exists(name):
            if required:
                raise ExperimentError(
                    message=f"split {name!r} not found in {self.config.section('data')['dir']!r}",
                    details={"split": name, "path": str(repo.path_for(name))},
                )
            return None
        return repo.split(name, limit=self.config.episode_cap())

    def fresh_model(self, class_set: ClassSet) -> NavigationModel:
        return NavigationModel.from_config(
            self.config.encoder_config(), class_set, seed=self.config.seed, **self.config.map_kwargs()
        )

    def strategy(self, class_set: ClassSet) -> CostStrategy:
        """Oracle costs when ``eval.oracle`` is set, else the model in ``eval.checkpoint``."""
        section = self.config.section("eval")
        if section["oracle"]:
            return OracleCostStrategy(class_set.count)
        if section["checkpoint"]:
            model = NavigationModel.from_checkpoint(load_checkpoint(section["checkpoint"]), class_set)
        else:
            logger.warning("no checkpoint given, using untrained parameters from seed %d", self.config.seed)
            model = self.fresh_model(class_set)
        return LearnedCostStrategy(model)

    # ──────────────────────────────────────────────
    # Commands
    # ──────────────────────────────────────────────

    def generate_data(self) -> dict:
        """Write ``train.json``, ``val.json`` and ``test.json`` into ``out``."""
        data = self.config.section("data")
        cap: int | None = self.config.episode_cap()
        grid_params = self.config.grid_params()
        sensor_params = self.config.sensor_params()
        summary: dict[str, Any] = {"paths": {}, "counts": {}}
        for split in SPLITS:
            count: int = int(data[split]) if cap is None else min(int(data[split]), cap)
            demonstrations = generate_split(
                split,
                count,
                self.config.seed,
                grid_params,
                DEFAULT_CLASS_SET,
                sensor_params,
                progress=self.progress,
            )
            path = save_dataset(
                demonstrations,
                self.config.out / f"{split}.json",
                class_set=DEFAULT_CLASS_SET,
                grid_params=grid_params,
                sensor_params=sensor_params,
                split=split,
            )
            summary["paths"][split] = str(path)
            summary["counts"][split] = len(demonstrations)
        return summary

    def train(self) -> dict:
        """Fit the model on the train split, monitoring val; writes checkpoints and ``history.csv``."""
        train_split = self.load_split("train")
        val_split = self.load_split("val", required=False)
        config = self.config.train_config(progress=self.progress)
        resume: str | None = self.config.section("train")["resume"]
        out: Path = self.config.out
        history: list[dict] = []

        if resume:
            checkpoint = load_checkpoint(resume)
            trainer = Trainer.resume(checkpoint, config, train_split.class_set)
            previous = out / "history.csv"
            if previous.is_file():
                frame = pd.read_csv(previous)
                history = frame[frame["epoch"] <= checkpoint.epoch][HISTORY_COLUMNS].to_dict("records")
        else:
            trainer = Trainer(self.fresh_model(train_split.class_set), config)

        def on_epoch(epoch: int, rows: list[dict]) -> None:
            history.extend(rows)
            write_history_csv(out / "history.csv", history)
            self._record_epoch(epoch, rows)

        result = trainer.fit(train_split, val_split, checkpoint_dir=out, on_epoch=on_epoch)
        history_path = write_history_csv(out / "history.csv", history)
        return {
            "epochs": trainer.epoch,
            "best_epoch": result.best_epoch,
            "best_nll": result.best_nll,
            "train_episodes": len(train_split),
            "val_episodes": len(val_split) if val_split is not None else 0,
            "checkpoints": {name: str(path) for name, path in result.checkpoints.items()},
            "history": str(history_path),
        }

    def evaluate(self) -> dict:
        """Score the val and test splits; writes ``results.csv`` and ``episodes.json``."""
        section = self.config.section("eval")
        splits = [(name, self.load_split(name, required=False)) for name in EVAL_SPLITS]
        splits = [(name, split) for name, split in splits if split is not None]
        if not splits:
            raise ExperimentError(message="no val or test split to evaluate", details={})
        class_set = splits[0][1].class_set
        strategy = self.strategy(class_set)
        alpha: float = float(self.config.section("train")["alpha"])
        loss_clamp: float = float(self.config.section("train")["loss_clamp"])

        summaries: list[MetricSummary] = []
        reports: list = []
        for name, split in splits:
            summary, split_reports = evaluate_demonstrations(
                name,
                split.demonstrations,
                strategy,
                split.sensor_params,
                alpha=alpha,
                planner=str(section["planner"]),
                loss_clamp=loss_clamp,
                progress=self.progress,
            )
            summaries.append(summary)
            reports.extend(split_reports)

        out: Path = self.config.out
        results = write_results_csv(out / "results.csv", summaries)
        episodes = write_episode_reports(out / "episodes.json", reports)
        return {
            "strategy": "oracle" if section["oracle"] else "learned",
            "planner": section["planner"],
            "metrics": {s.split: s.to_dict() for s in summaries},
            "results": str(results),
            "episodes": str(episodes),
        }

    def bench(self) -> dict:
        """Time control prediction per method and grid size; writes ``timings.csv``."""
        section = self.config.section("bench")
        strategy = self.strategy(DEFAULT_CLASS_SET)
        rows = run_benchmark(
            strategy,
            sizes=[int(s) for s in section["sizes"]],
            steps=int(section["steps"]),
            repeats=int(section["repeats"]),
            seed=self.config.seed,
            grid_params=self.config.grid_params(),
            sensor_params=self.config.sensor_params(),
            alpha=float(self.config.section("train")["alpha"]),
        )
        path = write_timings_csv(self.config.out / "timings.csv", rows)
        return {"timings": str(path), "rows": [r.to_dict() for r in rows]}

    def inspect(self) -> dict:
        """Dump images of one stored episode."""
        section = self.config.section("inspect")
        split = self.load_split(str(section["split"]))
        index: int = int(section["episode"])
        if not 0 <= index < len(split):
            raise ConfigurationError(f"episode {index} outside a split of {len(split)}", key="inspect.episode")
        written = inspect_episode(
            split[index],
            self.strategy(split.class_set),
            [int(t) for t in section["steps"]],
            self.config.out,
            split.class_set,
            split.sensor_params,
            alpha=float(self.config.section("train")["alpha"]),
        )
        return {"split": split.split, "episode": index, "files": len(written)}

    def policy_lab(self) -> dict:
        """Hard versus soft value iteration on the bordered room."""
        comparison = run_policy_lab(self.config.policy_lab_config())
        if not comparison.converged:
            logger.warning("value iteration did not converge within %d iterations", comparison.hard.iterations)
        written = write_comparison(comparison, self.config.out)
        return {**comparison.summary(), "files": {name: str(path) for name, path in written.items()}}
