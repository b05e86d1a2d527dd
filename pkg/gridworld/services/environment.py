"""
gridworld/services/environment.py
=================================
Procedural generation of bordered semantic grids.

A grid is a ``height x width`` array of class indices. The outer ring is
always wall; the interior starts free and is then covered by random
axis-aligned rectangles of the non-free classes. Generation is a pure
function of the seed and the parameters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .classes import DEFAULT_CLASS_SET, FREE, ClassSet
from .dynamics import AgentState
from .exceptions import InvalidGridError, InvalidStateError, UnknownClassError

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridParams:
    """Parameters of the procedural generator.

    Attributes:
        width: Number of columns, border included.
        height: Number of rows, border included.
        rect_count: Inclusive ``(min, max)`` number of rectangles.
        rect_size: Inclusive ``(min, max)`` rectangle side length.
        class_weights: Sampling weight of each non-free class.
    """

    width: int = 16
    height: int = 16
    rect_count: tuple[int, int] = (2, 6)
    rect_size: tuple[int, int] = (2, 6)
    class_weights: tuple[float, ...] = (1.0, 1.0, 1.0)

    def validate(self, class_set: ClassSet) -> None:
        """Raise :class:`InvalidGridError` on degenerate parameters."""
        if self.width < 4:
            raise InvalidGridError("width", self.width)
        if self.height < 4:
            raise InvalidGridError("height", self.height)
        low, high = self.rect_count
        if low < 0 or high < low:
            raise InvalidGridError("rect_count", self.rect_count)
        low, high = self.rect_size
        if low < 1 or high < low:
            raise InvalidGridError("rect_size", self.rect_size)
        if len(self.class_weights) != class_set.count - 1:
            raise InvalidGridError("class_weights", self.class_weights)
        if any(w < 0 for w in self.class_weights) or sum(self.class_weights) <= 0:
            raise InvalidGridError("class_weights", self.class_weights)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "rect_count": list(self.rect_count),
            "rect_size": list(self.rect_size),
            "class_weights": list(self.class_weights),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridParams":
        return cls(
            width=int(data["width"]),
            height=int(data["height"]),
            rect_count=tuple(int(v) for v in data["rect_count"]),
            rect_size=tuple(int(v) for v in data["rect_size"]),
            class_weights=tuple(float(v) for v in data["class_weights"]),
        )


@dataclass(frozen=True, eq=False)
class SemanticGrid:
    """An immutable labelled grid.

    Attributes:
        cells: ``(height, width)`` integer array of class indices.
        class_set: The label set the indices refer to.
        seed: Generator seed, ``None`` for hand-built grids.
    """

    cells: np.ndarray
    class_set: ClassSet = DEFAULT_CLASS_SET
    seed: int | None = None
    _free: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.int64, copy=True)
        if cells.ndim != 2:
            raise InvalidGridError("cells.ndim", cells.ndim)
        if cells.size and (cells.min() < 0 or cells.max() >= self.class_set.count):
            raise InvalidGridError("cells", "class index out of range")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "_free", cells == FREE)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticGrid):
            return NotImplemented
        return (
            self.class_set == other.class_set
            and self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def in_bounds(self, x: tuple[int, int]) -> bool:
        return 0 <= x[0] < self.height and 0 <= x[1] < self.width

    def class_at(self, x: tuple[int, int]) -> int:
        if not self.in_bounds(x):
            raise InvalidStateError(x, "outside the grid")
        return int(self.cells[x[0], x[1]])

    def is_free(self, x: tuple[int, int]) -> bool:
        return self.in_bounds(x) and bool(self._free[x[0], x[1]])

    def is_traversable(self, x: tuple[int, int]) -> bool:
        """True for in-bounds cells that are not wall."""
        if not self.in_bounds(x):
            return False
        if "wall" not in self.class_set.labels:
            return True
        return int(self.cells[x[0], x[1]]) != self.class_set.wall

    def wall_mask(self) -> np.ndarray:
        if "wall" not in self.class_set.labels:
            return np.zeros(self.shape, dtype=bool)
        return self.cells == self.class_set.wall

    def free_cells(self) -> list[AgentState]:
        rows, cols = np.nonzero(self._free)
        return [AgentState(int(r), int(c)) for r, c in zip(rows, cols)]

    def index(self, x: tuple[int, int]) -> int:
        """Flat row-major index of a cell."""
        return x[0] * self.width + x[1]

    def state_of(self, index: int) -> AgentState:
        return AgentState(index // self.width, index % self.width)

    def arrival_costs(self) -> np.ndarray:
        """Per-cell expert arrival cost as a ``(height, width)`` float array."""
        costs = np.asarray(self.class_set.expert_costs, dtype=np.float64)
        return costs[self.cells]


def generate_environment(
    seed: int,
    params: GridParams | None = None,
    class_set: ClassSet = DEFAULT_CLASS_SET,
) -> SemanticGrid:
    """Generate a bordered grid with random rectangles of the non-free classes.

    Args:
        seed: Seed of the generator; equal seeds give equal grids.
        params: Generator parameters, defaults to :class:`GridParams`.
        class_set: Labels to draw from. Must contain ``"wall"``.

    Returns:
        A :class:`SemanticGrid` whose outer ring is wall.

    Raises:
        InvalidGridError: On degenerate parameters.
    """
    params = params or GridParams()
    params.validate(class_set)
    if "wall" not in class_set.labels:
        raise InvalidGridError("class_set", "no wall class")

    rng: np.random.Generator = np.random.default_rng(seed)
    cells: np.ndarray = np.full((params.height, params.width), FREE, dtype=np.int64)

    weights = np.asarray(params.class_weights, dtype=np.float64)
    weights = weights / weights.sum()
    semantic = np.asarray(class_set.semantic_indices)

    count: int = int(rng.integers(params.rect_count[0], params.rect_count[1] + 1))
    interior_rows, interior_cols = params.height - 2, params.width - 2
    for _ in range(count):
        label = int(rng.choice(semantic, p=weights))
        size_h = int(rng.integers(params.rect_size[0], params.rect_size[1] + 1))
        size_w = int(rng.integers(params.rect_size[0], params.rect_size[1] + 1))
        top = 1 + int(rng.integers(0, interior_rows))
        left = 1 + int(rng.integers(0, interior_cols))
        cells[top : min(top + size_h, params.height - 1), left : min(left + size_w, params.width - 1)] = label

    wall = class_set.wall
    cells[0, :] = wall
    cells[-1, :] = wall
    cells[:, 0] = wall
    cells[:, -1] = wall

    logger.debug("generated %dx%d grid seed=%d rectangles=%d", params.height, params.width, seed, count)
    return SemanticGrid(cells=cells, class_set=class_set, seed=seed)


DEFAULT_LEGEND: dict[str, str] = {".": "empty", "#": "wall", "L": "lava", "g": "lawn"}


def grid_from_rows(
    rows: list[str],
    class_set: ClassSet = DEFAULT_CLASS_SET,
    legend: dict[str, str] | None = None,
) -> SemanticGrid:
    """Build a grid from rows of characters, one character per cell.

    The legend maps characters to class labels; by default ``.`` is empty,
    ``#`` wall, ``L`` lava and ``g`` lawn.
    """
    legend = legend or DEFAULT_LEGEND
    try:
        lookup: dict[str, int] = {ch: class_set.index_of(label) for ch, label in legend.items()}
        cells = [[lookup[ch] for ch in row] for row in rows]
    except KeyError as exc:
        raise InvalidGridError("rows", f"unknown cell character {exc.args[0]!r}") from exc
    except UnknownClassError as exc:
        raise InvalidGridError("rows", f"unknown label {exc.value!r}") from exc
    if len({len(row) for row in cells}) != 1:
        raise InvalidGridError("rows", "ragged rows")
    return SemanticGrid(cells=np.asarray(cells), class_set=class_set)
