"""
costnet/services/checkpoint.py
==============================
JSON checkpoints of everything training learns.

A checkpoint holds the encoder architecture and weights, the inverse
observation model (``Psi``, ``epsilon``, update mode), the Adam state, the
epoch reached and the seed. Floats go through ``json`` which writes the
shortest repr that round-trips, so save followed by load is bit-exact.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import CheckpointError
from .network import CostEncoderParams, EncoderConfig
from .optimizer import AdamState

logger: logging.Logger = logging.getLogger(__name__)

CHECKPOINT_VERSION: int = 1


@dataclass(eq=False)
class Checkpoint:
    """Learned state of a training run.

    Attributes:
        encoder: Encoder architecture.
        params: Encoder weights ``phi``.
        psi: ``(K+1, K+1)`` inverse observation matrix.
        epsilon: Inverse model cut-off.
        update_mode: ``"ray"`` or ``"endpoint"``.
        seed: Run seed.
        epoch: Last completed epoch, 0 before training.
        optimizer: Adam moments, ``None`` for an untrained model.
        classes: Class labels the model was trained on.
        best_epoch: Epoch with the lowest monitored NLL so far, ``None`` before training.
        best_nll: That NLL, ``None`` before training.
    """

    encoder: EncoderConfig
    params: CostEncoderParams
    psi: np.ndarray
    epsilon: float
    update_mode: str
    seed: int
    epoch: int = 0
    optimizer: AdamState | None = None
    classes: list[str] = field(default_factory=list)
    best_epoch: int | None = None
    best_nll: float | None = None

    def to_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "seed": self.seed,
            "epoch": self.epoch,
            "classes": list(self.classes),
            "encoder": self.encoder.to_dict(),
            "params": self.params.to_dict(),
            "psi": {"shape": list(self.psi.shape), "data": np.asarray(self.psi).ravel().tolist()},
            "epsilon": self.epsilon,
            "update_mode": self.update_mode,
            "optimizer": self.optimizer.to_dict() if self.optimizer else None,
            "best_epoch": self.best_epoch,
            "best_nll": self.best_nll,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Checkpoint":
        psi = data["psi"]
        return cls(
            encoder=EncoderConfig.from_dict(data["encoder"]),
            params=CostEncoderParams.from_dict(data["params"]),
            psi=np.asarray(psi["data"], dtype=np.float64).reshape(psi["shape"]),
            epsilon=float(data["epsilon"]),
            update_mode=str(data["update_mode"]),
            seed=int(data["seed"]),
            epoch=int(data.get("epoch", 0)),
            optimizer=AdamState.from_dict(data["optimizer"]) if data.get("optimizer") else None,
            classes=list(data.get("classes", [])),
            best_epoch=None if data.get("best_epoch") is None else int(data["best_epoch"]),
            best_nll=None if data.get("best_nll") is None else float(data["best_nll"]),
        )


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    """Write ``checkpoint`` to ``path`` atomically.

    Raises:
        CheckpointError: If the file cannot be written or holds non-finite values.
    """
    path = Path(path)
    if not checkpoint.params.is_finite() or not np.all(np.isfinite(checkpoint.psi)):
        raise CheckpointError(str(path), "refusing to save non-finite parameters")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(checkpoint.to_dict(), handle, allow_nan=False)
        os.replace(tmp_name, path)
    except (OSError, ValueError) as exc:
        logger.exception("failed to write checkpoint %s", path)
        raise CheckpointError(str(path), str(exc)) from exc
    logger.info("saved checkpoint epoch=%d to %s", checkpoint.epoch, path)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: On a missing file, bad JSON, another version or
            missing fields.
    """
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError as exc:
        raise CheckpointError(str(path), "file not found") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(str(path), f"unreadable: {exc}") from exc

    if data.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(str(path), f"unsupported version {data.get('version')!r}")
    try:
        checkpoint = Checkpoint.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(str(path), f"malformed: {exc}") from exc
    logger.debug("loaded checkpoint epoch=%d from %s", checkpoint.epoch, path)
    return checkpoint
