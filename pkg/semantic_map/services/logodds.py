"""
semantic_map/services/logodds.py
================================
Multi-class log-odds map with a linear inverse observation model.

Each observed cell ``j`` keeps ``h_j``, the log-ratio of every class's
probability to the free class's, so ``h_j[0]`` is 0 by construction. A scan
updates the map recursively::

    h_j <- h_j + sum over active (l, j) of (Psi @ y_l * dp - h0_j)

and the class posterior is ``softmax(h_j)``. Cells no ray has touched are
not stored and sit at the prior.

The map is immutable; :func:`update` returns a new map that also carries
the cumulative evidence needed to differentiate ``h`` with respect to
``Psi``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from gridworld.services.dynamics import AgentState
from sensor.services.lidar import LabeledPoint, PointCloud

from .evidence import UPDATE_MODES, ScanEvidence, build_scan_evidence, delta_p, ray_support
from .exceptions import InvalidPriorError, SemanticMapError

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(eq=False)
class InverseModelParams:
    """Learnable parameters of the inverse observation model.

    Attributes:
        psi: ``(K+1, K+1)`` matrix shared by every point.
        epsilon: Cells up to ``epsilon`` past a return are still updated.
        update_mode: ``"ray"`` (every cell along the ray) or ``"endpoint"``.
    """

    psi: np.ndarray
    epsilon: float = 0.5
    update_mode: str = "ray"

    def __post_init__(self) -> None:
        self.psi = np.array(self.psi, dtype=np.float64)
        if self.psi.ndim != 2 or self.psi.shape[0] != self.psi.shape[1]:
            raise SemanticMapError(message="psi must be square", details={"shape": list(self.psi.shape)})
        if not self.epsilon > 0:
            raise SemanticMapError(message="epsilon must be positive", details={"epsilon": self.epsilon})
        if self.update_mode not in UPDATE_MODES:
            raise SemanticMapError(message=f"unknown update mode {self.update_mode!r}", details={})

    @property
    def class_count(self) -> int:
        return int(self.psi.shape[0])

    @classmethod
    def scaled_identity(cls, class_count: int, scale: float, **kwargs) -> "InverseModelParams":
        """``scale`` on the diagonal of the class rows, zero on the free row."""
        psi = np.zeros((class_count, class_count))
        idx = np.arange(1, class_count)
        psi[idx, idx] = scale
        return cls(psi=psi, **kwargs)

    def copy(self) -> "InverseModelParams":
        return InverseModelParams(psi=self.psi.copy(), epsilon=self.epsilon, update_mode=self.update_mode)


@dataclass(frozen=True, eq=False)
class LogOddsMap:
    """Sparse per-cell class log-odds.

    Attributes:
        shape: ``(height, width)`` of the underlying grid.
        class_count: ``K+1``.
        prior: ``(K+1,)`` shared prior or ``(height*width, K+1)`` per-cell prior.
        cells: Sorted flat indices of the stored cells.
        logodds: ``(len(cells), K+1)`` log-odds vectors.
        evidence: Cumulative feature sums per stored cell.
        counts: Cumulative active pair counts per stored cell.
        scans: Number of scans integrated so far.
    """

    shape: tuple[int, int]
    class_count: int
    prior: np.ndarray
    cells: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    logodds: np.ndarray | None = None
    evidence: np.ndarray | None = None
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    scans: int = 0

    @classmethod
    def empty(cls, shape: tuple[int, int], class_count: int, prior: np.ndarray | None = None) -> "LogOddsMap":
        """A map with nothing observed.

        Raises:
            InvalidPriorError: If the prior has the wrong shape or a non-zero
                free component.
        """
        size: int = shape[0] * shape[1]
        prior = np.zeros(class_count) if prior is None else np.array(prior, dtype=np.float64)
        if prior.shape not in ((class_count,), (size, class_count)):
            raise InvalidPriorError(f"shape {prior.shape} fits neither ({class_count},) nor ({size}, {class_count})")
        if np.any(prior[..., 0] != 0):
            raise InvalidPriorError("free-class component must be 0")
        return cls(
            shape=(int(shape[0]), int(shape[1])),
            class_count=class_count,
            prior=prior,
            logodds=np.zeros((0, class_count)),
            evidence=np.zeros((0, class_count)),
        )

    def __len__(self) -> int:
        return int(self.cells.size)

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]

    def flat_index(self, j: tuple[int, int]) -> int:
        return int(j[0]) * self.shape[1] + int(j[1])

    def prior_rows(self, cells: np.ndarray) -> np.ndarray:
        if self.prior.ndim == 1:
            return np.broadcast_to(self.prior, (len(cells), self.class_count))
        return self.prior[cells]

    def position_of(self, flat: int) -> int | None:
        pos = int(np.searchsorted(self.cells, flat))
        if pos < self.cells.size and self.cells[pos] == flat:
            return pos
        return None

    def logodds_at(self, j: tuple[int, int]) -> np.ndarray:
        """``h_j``; the prior for cells never touched."""
        flat: int = self.flat_index(j)
        pos = self.position_of(flat)
        if pos is None:
            return np.array(self.prior if self.prior.ndim == 1 else self.prior[flat], dtype=np.float64)
        return self.logodds[pos].copy()

    def dense_logodds(self) -> np.ndarray:
        """All log-odds as a ``(K+1, height, width)`` array."""
        flat: np.ndarray = np.empty((self.size, self.class_count))
        flat[:] = self.prior
        flat[self.cells] = self.logodds
        return flat.T.reshape(self.class_count, *self.shape)

    def observed_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[self.cells] = True
        return mask.reshape(self.shape)


def inverse_logodds(
    x: AgentState,
    point: LabeledPoint,
    j: tuple[int, int],
    params: InverseModelParams,
    prior: np.ndarray | None = None,
) -> np.ndarray:
    """Log-odds ``g_j`` of the inverse observation of one point at cell ``j``.

    ``Psi @ y_l * dp`` when ``j`` is on the point's ray and ``dp <= epsilon``
    (``Psi @ y_l`` at the hit cell in endpoint mode), else the prior.
    """
    prior = np.zeros(params.class_count) if prior is None else np.asarray(prior, dtype=np.float64)
    j = AgentState(int(j[0]), int(j[1]))
    augmented: np.ndarray = point.augmented()
    if params.update_mode == "endpoint":
        return params.psi @ augmented if j == point.cell else prior.copy()
    if j not in ray_support(x, point):
        return prior.copy()
    dp: float = delta_p(x, point.position, j)
    if dp > params.epsilon:
        return prior.copy()
    return params.psi @ augmented * dp


def integrate(log_map: LogOddsMap, evidence: ScanEvidence, psi: np.ndarray) -> LogOddsMap:
    """Fold one scan's evidence into the map."""
    if len(evidence) == 0:
        return log_map
    merged: np.ndarray = np.union1d(log_map.cells, evidence.cells)
    old_pos: np.ndarray = np.searchsorted(merged, log_map.cells)
    new_pos: np.ndarray = np.searchsorted(merged, evidence.cells)

    prior_rows = log_map.prior_rows(merged)
    logodds: np.ndarray = np.array(prior_rows, dtype=np.float64, copy=True)
    logodds[old_pos] = log_map.logodds
    cumulative: np.ndarray = np.zeros((merged.size, log_map.class_count))
    cumulative[old_pos] = log_map.evidence
    counts: np.ndarray = np.zeros(merged.size, dtype=np.int64)
    counts[old_pos] = log_map.counts

    increment = evidence.features @ psi.T - evidence.counts[:, None] * prior_rows[new_pos]
    logodds[new_pos] += increment
    logodds[:, 0] = 0.0
    cumulative[new_pos] += evidence.features
    counts[new_pos] += evidence.counts

    return LogOddsMap(
        shape=log_map.shape,
        class_count=log_map.class_count,
        prior=log_map.prior,
        cells=merged,
        logodds=logodds,
        evidence=cumulative,
        counts=counts,
        scans=log_map.scans + 1,
    )


def update(log_map: LogOddsMap, x: AgentState, cloud: PointCloud, params: InverseModelParams) -> LogOddsMap:
    """Bayesian update of the map with one scan taken at ``x``.

    Raises:
        SemanticMapError: If the cloud was not taken at ``x`` or the class
            counts disagree.
    """
    x = AgentState(int(x[0]), int(x[1]))
    if cloud.origin != x:
        raise SemanticMapError(
            message=f"cloud origin {tuple(cloud.origin)} differs from {tuple(x)}",
            details={"origin": list(cloud.origin), "x": list(x)},
        )
    if params.class_count != log_map.class_count:
        raise SemanticMapError(
            message="psi does not match the map's class count",
            details={"psi": params.class_count, "map": log_map.class_count},
        )
    evidence = build_scan_evidence(
        x, cloud, params.epsilon, params.update_mode, log_map.shape, log_map.class_count
    )
    return integrate(log_map, evidence, params.psi)


def posterior(log_map: LogOddsMap, j: tuple[int, int]) -> np.ndarray:
    """Class probabilities of cell ``j``: ``softmax(h_j)``."""
    return softmax(log_map.logodds_at(j))


def posterior_grid(log_map: LogOddsMap) -> np.ndarray:
    """Class probabilities of every cell as a ``(K+1, height, width)`` array."""
    return softmax(log_map.dense_logodds(), axis=0)
