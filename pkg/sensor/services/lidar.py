"""
sensor/services/lidar.py
========================
Simulated semantic lidar.

Each beam is traced with :func:`sensor.services.raycast.trace_ray` and
stops at the first cell whose class is not free. The returned point lies
where the beam enters that cell and carries the one-hot label of its class.
Beams that run out of range return the range endpoint with an all-zero
label, i.e. free.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gridworld.services.classes import FREE
from gridworld.services.dynamics import AgentState
from gridworld.services.environment import SemanticGrid
from .exceptions import InvalidScanOriginError, InvalidSensorParamsError
from .raycast import ray_point, trace_ray

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SensorParams:
    """Beam layout of the sensor.

    Attributes:
        ray_count: Number of beams per scan.
        angular_resolution: Degrees between consecutive beams.
        max_range: Beam length in cells.
    """

    ray_count: int = 72
    angular_resolution: float = 5.0
    max_range: float = 3.0

    def __post_init__(self) -> None:
        if self.ray_count < 1:
            raise InvalidSensorParamsError("ray_count", self.ray_count)
        if self.angular_resolution <= 0:
            raise InvalidSensorParamsError("angular_resolution", self.angular_resolution)
        if self.max_range <= 0:
            raise InvalidSensorParamsError("max_range", self.max_range)

    def angles(self) -> list[float]:
        return [i * self.angular_resolution for i in range(self.ray_count)]

    def to_dict(self) -> dict:
        return {
            "ray_count": self.ray_count,
            "angular_resolution": self.angular_resolution,
            "max_range": self.max_range,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SensorParams":
        return cls(
            ray_count=int(data["ray_count"]),
            angular_resolution=float(data["angular_resolution"]),
            max_range=float(data["max_range"]),
        )


@dataclass(frozen=True)
class LabeledPoint:
    """One beam return.

    Attributes:
        cell: Grid cell the beam terminated in.
        position: Continuous ``(row, col)`` of the return.
        weights: Class weights for the K non-free classes; all zero means free.
        angle: Beam angle in degrees.
    """

    cell: AgentState
    position: tuple[float, float]
    weights: tuple[float, ...]
    angle: float

    @property
    def is_free(self) -> bool:
        return not any(self.weights)

    def augmented(self) -> np.ndarray:
        """Label vector with a leading 0 for the free class, length K+1."""
        return np.concatenate(([0.0], np.asarray(self.weights, dtype=np.float64)))

    def range_from(self, origin: tuple[int, int]) -> float:
        return float(np.hypot(self.position[0] - origin[0], self.position[1] - origin[1]))

    def to_list(self) -> list:
        return [self.cell.row, self.cell.col, list(self.weights), self.angle, self.position[0], self.position[1]]

    @classmethod
    def from_list(cls, data: list) -> "LabeledPoint":
        row, col, weights, angle, p_row, p_col = data
        return cls(
            cell=AgentState(int(row), int(col)),
            position=(float(p_row), float(p_col)),
            weights=tuple(float(w) for w in weights),
            angle=float(angle),
        )


@dataclass(frozen=True)
class PointCloud:
    """All returns of one scan, in beam order."""

    origin: AgentState
    points: tuple[LabeledPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def scan(grid: SemanticGrid, x: tuple[int, int], params: SensorParams | None = None) -> PointCloud:
    """Cast every beam from ``x`` and return the labelled point cloud.

    Args:
        grid: The environment being observed.
        x: Scan origin; any traversable cell.
        params: Beam layout, defaults to :class:`SensorParams`.

    Raises:
        InvalidScanOriginError: If ``x`` is off the grid or a wall.
    """
    params = params or SensorParams()
    origin = AgentState(int(x[0]), int(x[1]))
    if not grid.in_bounds(origin):
        raise InvalidScanOriginError(origin, "outside the grid")
    if not grid.is_traversable(origin):
        raise InvalidScanOriginError(origin, "origin is a wall")

    semantic_count: int = grid.class_set.count - 1
    points: list[LabeledPoint] = []
    for angle in params.angles():
        points.append(_cast_beam(grid, origin, angle, params.max_range, semantic_count))
    return PointCloud(origin=origin, points=tuple(points))


def _cast_beam(
    grid: SemanticGrid,
    origin: AgentState,
    angle: float,
    max_range: float,
    semantic_count: int,
) -> LabeledPoint:
    last_cell: AgentState = origin
    for hit in trace_ray(origin, angle, max_range):
        if not grid.in_bounds(hit.cell):
            break
        last_cell = hit.cell
        label: int = grid.class_at(hit.cell)
        if label != FREE:
            weights = [0.0] * semantic_count
            weights[label - 1] = 1.0
            return LabeledPoint(
                cell=hit.cell,
                position=ray_point(origin, angle, hit.entry),
                weights=tuple(weights),
                angle=angle,
            )
    return LabeledPoint(
        cell=last_cell,
        position=ray_point(origin, angle, max_range),
        weights=(0.0,) * semantic_count,
        angle=angle,
    )
