"""
learner/services/model.py
=========================
Everything training learns, in one place.

A :class:`NavigationModel` bundles the cost encoder (architecture and
weights ``phi``) with the inverse observation model (``Psi``). Adam sees
them as a single flat mapping whose ``"psi"`` entry is the matrix.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from costnet.services import (
    AdamState,
    Checkpoint,
    CostEncoder,
    CostEncoderParams,
    EncoderConfig,
    build_encoder,
)
from gridworld.services import DEFAULT_CLASS_SET, ClassSet
from semantic_map.services import InverseModelParams, LogOddsMap

from .exceptions import LearnerError

logger: logging.Logger = logging.getLogger(__name__)

PSI_KEY: str = "psi"


@dataclass(eq=False)
class NavigationModel:
    """Cost encoder plus map encoder.

    Attributes:
        encoder: Stateless cost encoder.
        params: Encoder weights ``phi``.
        inverse: ``Psi`` with its cut-off and update mode.
        class_set: Labels the posteriors are over.
        seed: Seed the weights were initialised from.
    """

    encoder: CostEncoder
    params: CostEncoderParams
    inverse: InverseModelParams
    class_set: ClassSet = DEFAULT_CLASS_SET
    seed: int = 0

    @classmethod
    def from_config(
        cls,
        encoder_config: EncoderConfig,
        class_set: ClassSet = DEFAULT_CLASS_SET,
        psi_init: float = 1.0,
        epsilon: float = 0.5,
        update_mode: str = "ray",
        seed: int = 0,
    ) -> "NavigationModel":
        """Fresh model: encoder weights from ``seed``, ``Psi = psi_init * I`` on the class rows."""
        encoder: CostEncoder = build_encoder(encoder_config, class_set.count)
        return cls(
            encoder=encoder,
            params=encoder.init_params(seed),
            inverse=InverseModelParams.scaled_identity(
                class_set.count, psi_init, epsilon=epsilon, update_mode=update_mode
            ),
            class_set=class_set,
            seed=seed,
        )

    @property
    def class_count(self) -> int:
        return self.class_set.count

    def empty_map(self, shape: tuple[int, int]) -> LogOddsMap:
        return LogOddsMap.empty(shape, self.class_count)

    def trainable(self) -> dict[str, np.ndarray]:
        """``phi`` entries followed by ``"psi"``."""
        values: dict[str, np.ndarray] = self.params.snapshot()
        values[PSI_KEY] = self.inverse.psi
        return values

    def assign(self, values: Mapping[str, np.ndarray]) -> None:
        """Install updated arrays produced from :meth:`trainable`."""
        for name, value in values.items():
            if name == PSI_KEY:
                psi = np.array(value, dtype=np.float64)
                if psi.shape != self.inverse.psi.shape:
                    raise LearnerError(
                        message="psi update has the wrong shape",
                        details={"expected": list(self.inverse.psi.shape), "got": list(psi.shape)},
                    )
                self.inverse.psi = psi
            else:
                self.params[name] = value

    def copy(self) -> "NavigationModel":
        return NavigationModel(
            encoder=self.encoder,
            params=self.params.copy(),
            inverse=self.inverse.copy(),
            class_set=self.class_set,
            seed=self.seed,
        )

    def to_checkpoint(
        self,
        epoch: int = 0,
        optimizer: AdamState | None = None,
        best_epoch: int | None = None,
        best_nll: float | None = None,
    ) -> Checkpoint:
        return Checkpoint(
            encoder=self.encoder.config,
            params=self.params.copy(),
            psi=self.inverse.psi.copy(),
            epsilon=self.inverse.epsilon,
            update_mode=self.inverse.update_mode,
            seed=self.seed,
            epoch=epoch,
            optimizer=optimizer,
            classes=list(self.class_set.labels),
            best_epoch=best_epoch,
            best_nll=best_nll,
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint, class_set: ClassSet = DEFAULT_CLASS_SET) -> "NavigationModel":
        """Rebuild a model.

        Raises:
            LearnerError: If the checkpoint was trained on other classes.
        """
        if checkpoint.classes and list(checkpoint.classes) != list(class_set.labels):
            raise LearnerError(
                message="checkpoint classes differ from the dataset's",
                details={"checkpoint": list(checkpoint.classes), "dataset": list(class_set.labels)},
            )
        encoder: CostEncoder = build_encoder(checkpoint.encoder, class_set.count)
        return cls(
            encoder=encoder,
            params=checkpoint.params.copy(),
            inverse=InverseModelParams(
                psi=checkpoint.psi.copy(), epsilon=checkpoint.epsilon, update_mode=checkpoint.update_mode
            ),
            class_set=class_set,
            seed=checkpoint.seed,
        )
