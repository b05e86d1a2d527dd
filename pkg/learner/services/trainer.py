"""
learner/services/trainer.py
===========================
Mini-batch training of ``phi`` and ``Psi``.

Each epoch shuffles the training episodes with a generator keyed on
``(seed, epoch)``, so a resumed run sees the same order as an
uninterrupted one. Within a batch every episode is recorded and
differentiated against the same parameters; the per-episode gradients are
summed in episode-index order and applied in one Adam step.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from tqdm import tqdm

from costnet.services import Adam, AdamState, Checkpoint, save_checkpoint
from gridworld.services import DEFAULT_CLASS_SET, ClassSet
from gridworld.services.dataset import Dataset
from gridworld.services.expert import Demonstration
from metrics.services import accuracy, nll

from .config import TrainConfig
from .cost_strategy import LearnedCostStrategy
from .exceptions import EmptyDatasetError
from .loss import EpisodeGradient, loss_gradient_step
from .model import PSI_KEY, NavigationModel
from .tape import EpisodeTape, record_episode

logger: logging.Logger = logging.getLogger(__name__)

BEST_CHECKPOINT: str = "best.json"
LAST_CHECKPOINT: str = "last.json"


@dataclass
class TrainingResult:
    """Outcome of :meth:`Trainer.fit`.

    Attributes:
        model: The trained model (the same object the trainer updated).
        history: Rows of ``epoch, split, nll, accuracy``.
        best_epoch: Epoch with the lowest monitored NLL, ``None`` without training.
        best_nll: That NLL.
        checkpoints: Paths written, by name.
    """

    model: NavigationModel
    history: list[dict] = field(default_factory=list)
    best_epoch: int | None = None
    best_nll: float = math.inf
    checkpoints: dict[str, Path] = field(default_factory=dict)


def evaluate_split(
    model: NavigationModel,
    demonstrations: Sequence[Demonstration],
    alpha: float,
    loss_clamp: float | None = 50.0,
    progress: bool = False,
    desc: str = "eval",
) -> tuple[float, float]:
    """Mean step NLL and accuracy of ``model`` along the expert states."""
    strategy = LearnedCostStrategy(model)
    policies: list[np.ndarray] = []
    controls: list[int] = []
    for demo in tqdm(demonstrations, desc=desc, disable=not progress):
        tape: EpisodeTape = record_episode(demo, strategy, alpha, loss_clamp, keep_caches=False)
        policies.extend(tape.policies())
        controls.extend(tape.controls())
    return nll(policies, controls, clamp=loss_clamp), accuracy(policies, controls)


class Trainer:
    """Runs epochs of gradient descent on a :class:`NavigationModel`.

    Typical usage::

        trainer = Trainer(model, TrainConfig(epochs=5))
        result = trainer.fit(train_split, val_split, checkpoint_dir="runs/x")
    """

    def __init__(
        self,
        model: NavigationModel,
        config: TrainConfig,
        optimizer: Adam | None = None,
        start_epoch: int = 0,
        best_epoch: int | None = None,
        best_nll: float = math.inf,
    ) -> None:
        self.model: NavigationModel = model
        self.config: TrainConfig = config
        self.optimizer: Adam = optimizer or Adam(config.lr, config.beta1, config.beta2, config.eps_adam)
        self.epoch: int = start_epoch
        self.best_epoch: int | None = best_epoch
        self.best_nll: float = best_nll

    @classmethod
    def resume(cls, checkpoint: Checkpoint, config: TrainConfig, class_set: ClassSet = DEFAULT_CLASS_SET) -> "Trainer":
        """Continue from ``checkpoint`` with its weights, Adam moments, epoch count and best-so-far NLL."""
        model = NavigationModel.from_checkpoint(checkpoint, class_set)
        state = checkpoint.optimizer or AdamState()
        optimizer = Adam(config.lr, config.beta1, config.beta2, config.eps_adam, state=state)
        logger.info("resuming training after epoch %d (adam step %d)", checkpoint.epoch, state.t)
        best_nll: float = math.inf if checkpoint.best_nll is None else checkpoint.best_nll
        return cls(
            model,
            config,
            optimizer=optimizer,
            start_epoch=checkpoint.epoch,
            best_epoch=checkpoint.best_epoch,
            best_nll=best_nll,
        )

    # ──────────────────────────────────────────────
    # Gradient steps
    # ──────────────────────────────────────────────

    def episode_gradient(self, demonstration: Demonstration) -> tuple[EpisodeGradient, EpisodeTape]:
        """Record one episode against the current parameters and differentiate it."""
        tape = record_episode(
            demonstration, LearnedCostStrategy(self.model), self.config.alpha, self.config.loss_clamp
        )
        try:
            return loss_gradient_step(tape, self.model), tape
        finally:
            tape.release()

    def batch_step(self, batch: Sequence[tuple[int, Demonstration]]) -> list[EpisodeTape]:
        """Sum the episode gradients of ``batch`` and apply one Adam step."""
        results: dict[int, tuple[EpisodeGradient, EpisodeTape]] = {
            index: self.episode_gradient(demo) for index, demo in batch
        }
        total: dict[str, np.ndarray] = {name: np.zeros_like(a) for name, a in self.model.trainable().items()}
        tapes: list[EpisodeTape] = []
        for index in sorted(results):
            gradient, tape = results[index]
            for name, value in gradient.d_phi.items():
                total[name] = total[name] + value
            total[PSI_KEY] = total[PSI_KEY] + gradient.d_psi
            tapes.append(tape)
        values = self.model.trainable()
        self.optimizer.step(values, total)
        self.model.assign(values)
        return tapes

    def train_epoch(self, demonstrations: Sequence[Demonstration]) -> tuple[float, float]:
        """One pass over ``demonstrations``; returns the training NLL and accuracy seen on the way."""
        self.epoch += 1
        rng: np.random.Generator = np.random.default_rng([self.config.seed, self.epoch])
        order: np.ndarray = rng.permutation(len(demonstrations))
        policies: list[np.ndarray] = []
        controls: list[int] = []
        size: int = self.config.batch_size
        batches = [order[i : i + size] for i in range(0, len(order), size)]
        for batch in tqdm(batches, desc=f"epoch {self.epoch}", disable=not self.config.progress):
            for tape in self.batch_step([(int(i), demonstrations[int(i)]) for i in batch]):
                policies.extend(tape.policies())
                controls.extend(tape.controls())
        return nll(policies, controls, clamp=self.config.loss_clamp), accuracy(policies, controls)

    # ──────────────────────────────────────────────
    # Full runs
    # ──────────────────────────────────────────────

    def _save(self, directory: Path, name: str, result: TrainingResult) -> None:
        checkpoint = self.model.to_checkpoint(
            epoch=self.epoch,
            optimizer=self.optimizer.state,
            best_epoch=result.best_epoch,
            best_nll=result.best_nll if math.isfinite(result.best_nll) else None,
        )
        result.checkpoints[name] = save_checkpoint(checkpoint, directory / name)

    def fit(
        self,
        train: Dataset | Sequence[Demonstration],
        val: Dataset | Sequence[Demonstration] | None = None,
        checkpoint_dir: str | Path | None = None,
        on_epoch: Callable[[int, list[dict]], None] | None = None,
    ) -> TrainingResult:
        """Train until ``config.epochs`` epochs have been completed.

        Args:
            train: Training demonstrations.
            val: Validation demonstrations; the best checkpoint follows their
                NLL, or the training NLL when absent.
            checkpoint_dir: Where ``best.json`` and ``last.json`` go.
            on_epoch: Called with the epoch and its history rows.

        Returns:
            A :class:`TrainingResult`. With no epochs left the model is
            unchanged and the history empty.

        Raises:
            EmptyDatasetError: If ``train`` has no episodes.
        """
        train_demos: list[Demonstration] = list(train)
        val_demos: list[Demonstration] = list(val) if val is not None else []
        if not train_demos:
            raise EmptyDatasetError("train")
        directory: Path | None = Path(checkpoint_dir) if checkpoint_dir is not None else None
        result = TrainingResult(model=self.model, best_epoch=self.best_epoch, best_nll=self.best_nll)

        if directory is not None and self.epoch >= self.config.epochs:
            if self.best_epoch is not None and (directory / BEST_CHECKPOINT).is_file():
                result.checkpoints[BEST_CHECKPOINT] = directory / BEST_CHECKPOINT
            else:
                self._save(directory, BEST_CHECKPOINT, result)
            self._save(directory, LAST_CHECKPOINT, result)

        while self.epoch < self.config.epochs:
            train_nll, train_acc = self.train_epoch(train_demos)
            rows: list[dict] = [{"epoch": self.epoch, "split": "train", "nll": train_nll, "accuracy": train_acc}]
            monitored: float = train_nll
            if val_demos:
                val_nll, val_acc = evaluate_split(
                    self.model, val_demos, self.config.alpha, self.config.loss_clamp, self.config.progress, "val"
                )
                rows.append({"epoch": self.epoch, "split": "val", "nll": val_nll, "accuracy": val_acc})
                monitored = val_nll
            result.history.extend(rows)
            logger.info(
                "epoch %d: train nll=%.4f acc=%.3f%s",
                self.epoch,
                train_nll,
                train_acc,
                f" val nll={rows[-1]['nll']:.4f} acc={rows[-1]['accuracy']:.3f}" if val_demos else "",
            )

            if monitored < result.best_nll:
                result.best_nll, result.best_epoch = monitored, self.epoch
                self.best_nll, self.best_epoch = monitored, self.epoch
                if directory is not None:
                    self._save(directory, BEST_CHECKPOINT, result)
            every: int = self.config.checkpoint_every
            if directory is not None and (
                (every and self.epoch % every == 0) or self.epoch == self.config.epochs
            ):
                self._save(directory, LAST_CHECKPOINT, result)
            if on_epoch is not None:
                on_epoch(self.epoch, rows)
        return result


def train(
    dataset: Dataset | Sequence[Demonstration],
    config: TrainConfig,
    model: NavigationModel,
    val: Dataset | Sequence[Demonstration] | None = None,
    checkpoint_dir: str | Path | None = None,
) -> TrainingResult:
    """Train ``model`` in place from scratch; see :meth:`Trainer.fit`."""
    return Trainer(model, config).fit(dataset, val, checkpoint_dir)
