"""
learner/services/config.py
==========================
Training hyper-parameters.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields
from typing import Any

from .exceptions import LearnerError


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one training run.

    Attributes:
        alpha: Boltzmann temperature of the policy.
        lr: Adam learning rate.
        beta1: Adam first moment decay.
        beta2: Adam second moment decay.
        eps_adam: Adam denominator guard.
        epochs: Passes over the training split; 0 leaves the model untouched.
        batch_size: Episodes whose gradients are summed before one Adam step.
        seed: Seed of the episode shuffling.
        checkpoint_every: Write ``last.json`` every this many epochs, 0 for
            only at the end.
        loss_clamp: Upper bound in nats on the loss of a single step.
        data_dir: Directory holding the split files.
        progress: Show tqdm bars.
    """

    alpha: float = 1.0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    epochs: int = 30
    batch_size: int = 8
    seed: int = 0
    checkpoint_every: int = 1
    loss_clamp: float = 50.0
    data_dir: str = "data"
    progress: bool = False

    def __post_init__(self) -> None:
        checks: list[tuple[str, bool]] = [
            ("alpha", self.alpha > 0 and math.isfinite(self.alpha)),
            ("lr", self.lr > 0 and math.isfinite(self.lr)),
            ("beta1", 0.0 <= self.beta1 < 1.0),
            ("beta2", 0.0 <= self.beta2 < 1.0),
            ("eps_adam", self.eps_adam > 0),
            ("epochs", self.epochs >= 0),
            ("batch_size", self.batch_size >= 1),
            ("checkpoint_every", self.checkpoint_every >= 0),
            ("loss_clamp", self.loss_clamp > 0),
        ]
        for name, ok in checks:
            if not ok:
                raise LearnerError(
                    message=f"invalid training setting {name}={getattr(self, name)!r}",
                    details={"field": name, "value": getattr(self, name)},
                )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], seed: int | None = None) -> "TrainConfig":
        """Build from the ``train`` block of a run configuration.

        Keys the dataclass does not know (``resume``) are ignored.
        """
        known = {f.name for f in fields(cls)}
        values: dict[str, Any] = {k: v for k, v in data.items() if k in known}
        if seed is not None:
            values["seed"] = int(seed)
        return cls(**values)
