"""
semantic_map/services/backprop.py
=================================
Gradients of the map encoder.

``h`` is linear in ``Psi``: for a stored cell ``j`` with cumulative features
``E_j``, ``h_j = prior_j + Psi @ E_j - n_j * prior_j`` with component 0 pinned
to zero. Hence for an upstream gradient ``G`` on the stored log-odds,
``dPsi += G.T @ E`` with row 0 masked.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .evidence import ScanEvidence
from .exceptions import SparsityMismatchError
from .logodds import LogOddsMap

logger: logging.Logger = logging.getLogger(__name__)


@dataclass
class MapGradients:
    """Accumulator of the loss gradient with respect to ``Psi``."""

    d_psi: np.ndarray

    @classmethod
    def zeros(cls, class_count: int) -> "MapGradients":
        return cls(d_psi=np.zeros((class_count, class_count)))

    def zero(self) -> None:
        self.d_psi[...] = 0.0

    def merge(self, other: "MapGradients") -> None:
        self.d_psi += other.d_psi


@dataclass(frozen=True, eq=False)
class LogOddsGradient:
    """Sparse gradient on log-odds: one ``(K+1)`` row per listed flat cell."""

    cells: np.ndarray
    values: np.ndarray = field(repr=False)

    @classmethod
    def restrict(cls, log_map: LogOddsMap, dense: np.ndarray) -> "LogOddsGradient":
        """Take a ``(K+1, height, width)`` gradient at the map's stored cells only.

        Unstored cells sit at the prior, which does not depend on ``Psi``.
        """
        flat: np.ndarray = dense.reshape(dense.shape[0], -1).T
        return cls(cells=log_map.cells.copy(), values=flat[log_map.cells].copy())


def softmax_backward(probabilities: np.ndarray, d_probabilities: np.ndarray, axis: int = 0) -> np.ndarray:
    """Vector-Jacobian product of softmax: ``p * (dp - sum(p * dp))`` along ``axis``."""
    inner = np.sum(probabilities * d_probabilities, axis=axis, keepdims=True)
    return probabilities * (d_probabilities - inner)


def _accumulate(cells: np.ndarray, features: np.ndarray, upstream: LogOddsGradient, d_psi: np.ndarray) -> None:
    common, up_pos, ev_pos = np.intersect1d(upstream.cells, cells, assume_unique=True, return_indices=True)
    if common.size:
        d_psi += upstream.values[up_pos].T @ features[ev_pos]


def backprop_to_psi(
    history: LogOddsMap | Sequence[ScanEvidence],
    upstream: LogOddsGradient,
    grads: MapGradients,
) -> MapGradients:
    """Accumulate ``d loss / d Psi`` into ``grads``.

    Args:
        history: The map whose log-odds the gradient refers to, or the
            sequence of scan evidences that built it.
        upstream: Gradient of the loss on the stored log-odds.
        grads: Accumulator, updated in place and returned.

    Raises:
        SparsityMismatchError: If ``upstream`` lists a cell the map never touched.
    """
    if isinstance(history, LogOddsMap):
        sources: list[tuple[np.ndarray, np.ndarray]] = [(history.cells, history.evidence)]
        touched: np.ndarray = history.cells
    else:
        sources = [(ev.cells, ev.features) for ev in history]
        touched = np.unique(np.concatenate([ev.cells for ev in history])) if sources else np.zeros(0, np.int64)

    outside: np.ndarray = np.setdiff1d(upstream.cells, touched)
    if outside.size:
        raise SparsityMismatchError(outside.tolist())

    contribution: np.ndarray = np.zeros_like(grads.d_psi)
    for cells, features in sources:
        _accumulate(cells, features, upstream, contribution)
    # free-class row is pinned
    contribution[0, :] = 0.0
    grads.d_psi += contribution
    return grads
