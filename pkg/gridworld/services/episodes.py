"""
gridworld/services/episodes.py
==============================
Episode sampling and split generation.

Every episode is a pure function of its seed: the grid comes from
:func:`generate_environment` and the start/goal pair from a generator keyed
on the same seed. Splits draw from disjoint seed ranges so that no
environment appears in two splits.
"""

from __future__ import annotations

import logging

import numpy as np
from tqdm import tqdm

from sensor.services.lidar import SensorParams

from .classes import DEFAULT_CLASS_SET, ClassSet
from .dynamics import AgentState
from .environment import GridParams, SemanticGrid, generate_environment
from .exceptions import GridWorldError
from .expert import Demonstration, InfeasibleDemonstration, generate_demonstration

logger: logging.Logger = logging.getLogger(__name__)

SPLIT_OFFSETS: dict[str, int] = {"train": 0, "val": 1_000_000, "test": 2_000_000}
SEED_STRIDE: int = 10_000_000


def episode_seed(split: str, base_seed: int, index: int) -> int:
    """Seed of the ``index``-th candidate episode of ``split``."""
    if split not in SPLIT_OFFSETS:
        raise GridWorldError(message=f"unknown split {split!r}", details={"split": split})
    return base_seed * SEED_STRIDE + SPLIT_OFFSETS[split] + index


def sample_start_goal(
    grid: SemanticGrid,
    rng: np.random.Generator,
    min_separation: int | None = None,
) -> tuple[AgentState, AgentState] | None:
    """Draw a free start and goal at least ``min_separation`` apart (Manhattan).

    The default separation is half the longer grid side. Returns ``None``
    when no pair qualifies.
    """
    if min_separation is None:
        min_separation = max(grid.height, grid.width) // 2
    free: list[AgentState] = grid.free_cells()
    if len(free) < 2:
        return None
    coords: np.ndarray = np.asarray(free, dtype=np.int64)
    distance: np.ndarray = np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2)
    starts, goals = np.nonzero(distance >= max(min_separation, 1))
    if starts.size == 0:
        return None
    pick: int = int(rng.integers(0, starts.size))
    return free[int(starts[pick])], free[int(goals[pick])]


def sample_episode(
    seed: int,
    grid_params: GridParams | None = None,
    class_set: ClassSet = DEFAULT_CLASS_SET,
    sensor_params: SensorParams | None = None,
) -> Demonstration | InfeasibleDemonstration | None:
    """Generate the grid and the expert episode for one seed.

    Returns ``None`` when the grid has no admissible start/goal pair.
    """
    grid: SemanticGrid = generate_environment(seed, grid_params, class_set)
    rng: np.random.Generator = np.random.default_rng([seed, 1])
    pair = sample_start_goal(grid, rng)
    if pair is None:
        return None
    start, goal = pair
    return generate_demonstration(grid, start, goal, sensor_params)


def generate_split(
    split: str,
    count: int,
    base_seed: int = 0,
    grid_params: GridParams | None = None,
    class_set: ClassSet = DEFAULT_CLASS_SET,
    sensor_params: SensorParams | None = None,
    progress: bool = False,
) -> list[Demonstration]:
    """Collect ``count`` feasible demonstrations for ``split``.

    Candidate seeds are tried in order; infeasible ones are discarded.

    Raises:
        GridWorldError: If too many consecutive candidates are infeasible.
    """
    demonstrations: list[Demonstration] = []
    discarded: int = 0
    max_attempts: int = 20 * count + 100
    index: int = 0
    with tqdm(total=count, desc=f"gen {split}", disable=not progress) as bar:
        while len(demonstrations) < count:
            if index >= max_attempts:
                raise GridWorldError(
                    message=f"gave up on split {split} after {index} candidate episodes",
                    details={"split": split, "collected": len(demonstrations), "discarded": discarded},
                )
            outcome = sample_episode(episode_seed(split, base_seed, index), grid_params, class_set, sensor_params)
            index += 1
            if not isinstance(outcome, Demonstration):
                discarded += 1
                continue
            demonstrations.append(outcome)
            bar.update(1)
    if discarded:
        logger.warning("split %s: discarded %d infeasible episodes", split, discarded)
    logger.info("split %s: generated %d demonstrations", split, len(demonstrations))
    return demonstrations
