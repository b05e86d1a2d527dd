"""
semantic_map/services/evidence.py
=================================
Per-scan evidence of the linear inverse observation model.

For a point ``l`` and a cell ``j`` on its ray, the inverse observation is
``g_j = Psi @ y_l * dp`` with ``dp = d(x, centre_j) - |p_l - x|``, applied
only when ``dp <= epsilon``. Because ``g`` is linear in ``Psi``, one scan is
fully described by the per-cell sums of ``y_l * dp`` (the features) and the
number of active point/cell pairs (the counts). Both are accumulated in
COO form, so repeated cells sum up.

In ``"endpoint"`` mode a point contributes ``y_l`` at its hit cell only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from gridworld.services.dynamics import AgentState
from sensor.services.lidar import LabeledPoint, PointCloud
from sensor.services.raycast import ray_cells

from .exceptions import SemanticMapError

logger: logging.Logger = logging.getLogger(__name__)

UPDATE_MODES: tuple[str, ...] = ("ray", "endpoint")


def delta_p(x: tuple[int, int], p_l: tuple[float, float], j: tuple[int, int]) -> float:
    """Distance from ``x`` to the centre of ``j`` minus the range of ``p_l``, in cells."""
    return math.hypot(j[0] - x[0], j[1] - x[1]) - math.hypot(p_l[0] - x[0], p_l[1] - x[1])


def ray_support(x: AgentState, point: LabeledPoint) -> list[AgentState]:
    """Cells from ``x`` out to the point's hit cell, inclusive."""
    cells = ray_cells(x, point.angle, point.range_from(x))
    try:
        return cells[: cells.index(point.cell) + 1]
    except ValueError:
        return []


@dataclass(frozen=True, eq=False)
class ScanEvidence:
    """Sparse sufficient statistics of one scan.

    Attributes:
        cells: Sorted flat indices of the touched cells.
        features: ``(len(cells), K+1)`` sums of ``y_l * dp`` per cell.
        counts: Number of active point/cell pairs per cell.
    """

    cells: np.ndarray
    features: np.ndarray
    counts: np.ndarray

    @classmethod
    def empty(cls, class_count: int) -> "ScanEvidence":
        return cls(
            cells=np.zeros(0, dtype=np.int64),
            features=np.zeros((0, class_count)),
            counts=np.zeros(0, dtype=np.int64),
        )

    def __len__(self) -> int:
        return int(self.cells.size)

    def as_sparse(self, size: int) -> sparse.csr_matrix:
        """Features as a ``(size, K+1)`` sparse matrix indexed by flat cell."""
        rows = np.repeat(self.cells, self.features.shape[1])
        cols = np.tile(np.arange(self.features.shape[1]), self.cells.size)
        return sparse.coo_matrix((self.features.ravel(), (rows, cols)), shape=(size, self.features.shape[1])).tocsr()


def build_scan_evidence(
    x: AgentState,
    cloud: PointCloud,
    epsilon: float,
    update_mode: str,
    shape: tuple[int, int],
    class_count: int,
) -> ScanEvidence:
    """Collect the active point/cell pairs of one scan.

    Contributions are put in a canonical order before summation so that the
    result does not depend on the order of the points.
    """
    if update_mode not in UPDATE_MODES:
        raise SemanticMapError(message=f"unknown update mode {update_mode!r}", details={"mode": update_mode})
    height, width = shape

    contributions: list[tuple[int, float, float, tuple[float, ...]]] = []
    for point in cloud.points:
        if len(point.weights) + 1 != class_count:
            raise SemanticMapError(
                message="point label length does not match the class count",
                details={"weights": len(point.weights), "class_count": class_count},
            )
        if update_mode == "endpoint":
            cell = point.cell
            if 0 <= cell.row < height and 0 <= cell.col < width:
                contributions.append((cell.row * width + cell.col, 1.0, point.angle, point.weights))
            continue
        for cell in ray_support(x, point):
            if not (0 <= cell.row < height and 0 <= cell.col < width):
                continue
            dp: float = delta_p(x, point.position, cell)
            if dp <= epsilon:
                contributions.append((cell.row * width + cell.col, dp, point.angle, point.weights))

    if not contributions:
        return ScanEvidence.empty(class_count)
    contributions.sort()

    flat = np.fromiter((c[0] for c in contributions), dtype=np.int64, count=len(contributions))
    scale = np.fromiter((c[1] for c in contributions), dtype=np.float64, count=len(contributions))
    labels = np.zeros((len(contributions), class_count))
    labels[:, 1:] = np.asarray([c[3] for c in contributions], dtype=np.float64)
    values = labels * scale[:, None]

    cells, inverse, counts = np.unique(flat, return_inverse=True, return_counts=True)
    rows = np.repeat(inverse, class_count)
    cols = np.tile(np.arange(class_count), len(contributions))
    features = sparse.coo_matrix((values.ravel(), (rows, cols)), shape=(cells.size, class_count)).toarray()

    logger.debug("scan at %s: %d active pairs over %d cells", tuple(x), len(contributions), cells.size)
    return ScanEvidence(cells=cells.astype(np.int64), features=features, counts=counts.astype(np.int64))
