"""
gridworld/services/dataset.py
=============================
JSON persistence of demonstration datasets.

Layout::

    {
      "version": 1,
      "classes": [...], "expert_costs": [...], "colors": [...],
      "grid_params": {...} | null,
      "sensor_params": {...} | null,
      "split": "train" | null,
      "demonstrations": [
        {"grid_seed", "height", "width", "cells", "start", "goal",
         "steps": [{"state", "control", "scan": [[row, col, weights, angle, p_row, p_col], ...]}]}
      ]
    }

Grids are stored in full and may also be regenerated from their seed; when
both are available, loading checks that they agree.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sensor.services.lidar import LabeledPoint, PointCloud, SensorParams

from .classes import DEFAULT_CLASS_SET, ClassSet
from .dynamics import AgentState, Control
from .environment import GridParams, SemanticGrid, generate_environment
from .exceptions import DatasetError, DatasetSchemaError, InvalidClassSetError, SchemaVersionError
from .expert import Demonstration, DemonstrationStep

logger: logging.Logger = logging.getLogger(__name__)

SCHEMA_VERSION: int = 1


@dataclass(frozen=True)
class Dataset:
    """Demonstrations plus the generation settings recorded in the header."""

    demonstrations: tuple[Demonstration, ...]
    class_set: ClassSet = DEFAULT_CLASS_SET
    grid_params: GridParams | None = None
    sensor_params: SensorParams | None = None
    split: str | None = None

    def __len__(self) -> int:
        return len(self.demonstrations)

    def __iter__(self):
        return iter(self.demonstrations)

    def __getitem__(self, index: int) -> Demonstration:
        return self.demonstrations[index]


# ──────────────────────────────────────────────────────────────────────
# Encoding
# ──────────────────────────────────────────────────────────────────────


def _encode_demonstration(demo: Demonstration) -> dict:
    return {
        "grid_seed": demo.grid.seed,
        "height": demo.grid.height,
        "width": demo.grid.width,
        "cells": demo.grid.cells.ravel().tolist(),
        "start": list(demo.start),
        "goal": list(demo.goal),
        "steps": [
            {
                "state": list(s.state),
                "control": int(s.control),
                "scan": [point.to_list() for point in s.scan.points],
            }
            for s in demo.steps
        ],
    }


def save_dataset(
    demonstrations: list[Demonstration] | Dataset,
    path: str | Path,
    *,
    class_set: ClassSet | None = None,
    grid_params: GridParams | None = None,
    sensor_params: SensorParams | None = None,
    split: str | None = None,
) -> Path:
    """Write demonstrations to ``path`` atomically.

    Raises:
        DatasetError: If the file cannot be written.
    """
    if isinstance(demonstrations, Dataset):
        class_set = class_set or demonstrations.class_set
        grid_params = grid_params or demonstrations.grid_params
        sensor_params = sensor_params or demonstrations.sensor_params
        split = split or demonstrations.split
        demonstrations = list(demonstrations.demonstrations)
    if class_set is None:
        class_set = demonstrations[0].grid.class_set if demonstrations else DEFAULT_CLASS_SET

    payload: dict = {
        "version": SCHEMA_VERSION,
        "classes": list(class_set.labels),
        "expert_costs": list(class_set.expert_costs),
        "colors": [list(color) for color in class_set.colors],
        "grid_params": grid_params.to_dict() if grid_params else None,
        "sensor_params": sensor_params.to_dict() if sensor_params else None,
        "split": split,
        "demonstrations": [_encode_demonstration(d) for d in demonstrations],
    }

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, separators=(",", ":"))
        os.replace(tmp_name, path)
    except OSError as exc:
        logger.exception("failed to write dataset %s", path)
        raise DatasetError(message=f"cannot write dataset {path}: {exc}", details={"path": str(path)}) from exc

    logger.info("saved %d demonstrations to %s", len(demonstrations), path)
    return path


# ──────────────────────────────────────────────────────────────────────
# Decoding
# ──────────────────────────────────────────────────────────────────────


def _decode_demonstration(
    raw: dict,
    class_set: ClassSet,
    grid_params: GridParams | None,
    path: str,
) -> Demonstration:
    height, width = int(raw["height"]), int(raw["width"])
    cells = np.asarray(raw["cells"], dtype=np.int64)
    if cells.size != height * width:
        raise DatasetSchemaError(path, f"cell array has {cells.size} entries, expected {height * width}")
    seed = raw["grid_seed"]
    grid = SemanticGrid(cells=cells.reshape(height, width), class_set=class_set, seed=seed)

    if seed is not None and grid_params is not None:
        if generate_environment(int(seed), grid_params, class_set) != grid:
            raise DatasetSchemaError(path, f"stored grid disagrees with seed {seed}")

    steps: list[DemonstrationStep] = []
    for raw_step in raw["steps"]:
        state = AgentState(*(int(v) for v in raw_step["state"]))
        points = tuple(LabeledPoint.from_list(p) for p in raw_step["scan"])
        steps.append(
            DemonstrationStep(
                state=state,
                control=Control(int(raw_step["control"])),
                scan=PointCloud(origin=state, points=points),
            )
        )
    demo = Demonstration(
        grid=grid,
        start=AgentState(*(int(v) for v in raw["start"])),
        goal=AgentState(*(int(v) for v in raw["goal"])),
        steps=tuple(steps),
    )
    if not demo.is_consistent():
        raise DatasetSchemaError(path, "recorded controls do not replay to the recorded states")
    return demo


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset written by :func:`save_dataset`.

    Raises:
        DatasetError: If the file cannot be read.
        DatasetSchemaError: On truncated or malformed content.
        SchemaVersionError: On an unsupported version.
    """
    path = Path(path)
    try:
        text: str = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(message=f"cannot read dataset {path}: {exc}", details={"path": str(path)}) from exc

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetSchemaError(str(path), f"invalid JSON ({exc.msg} at char {exc.pos})") from exc
    if not isinstance(payload, dict):
        raise DatasetSchemaError(str(path), "top level is not an object")
    if payload.get("version") != SCHEMA_VERSION:
        raise SchemaVersionError(str(path), payload.get("version"), SCHEMA_VERSION)

    try:
        class_set = ClassSet(
            labels=tuple(payload["classes"]),
            expert_costs=tuple(float(c) for c in payload["expert_costs"]),
            colors=tuple(tuple(int(v) for v in c) for c in payload["colors"]),
        )
        grid_params = GridParams.from_dict(payload["grid_params"]) if payload["grid_params"] else None
        sensor_params = SensorParams.from_dict(payload["sensor_params"]) if payload["sensor_params"] else None
        demonstrations = tuple(
            _decode_demonstration(raw, class_set, grid_params, str(path)) for raw in payload["demonstrations"]
        )
    except DatasetError:
        raise
    except (KeyError, TypeError, ValueError, InvalidClassSetError) as exc:
        raise DatasetSchemaError(str(path), f"{type(exc).__name__}: {exc}") from exc

    logger.debug("loaded %d demonstrations from %s", len(demonstrations), path)
    return Dataset(
        demonstrations=demonstrations,
        class_set=class_set,
        grid_params=grid_params,
        sensor_params=sensor_params,
        split=payload.get("split"),
    )


class DatasetRepository:
    """Loads and caches the split files of one data directory.

    Typical usage::

        repo = DatasetRepository("runs/data")
        train = repo.split("train")
    """

    def __init__(self, data_dir: str | Path) -> None:
        self._data_dir: Path = Path(data_dir)
        self._cache: dict[str, Dataset] = {}

    def path_for(self, split: str) -> Path:
        return self._data_dir / f"{split}.json"

    def exists(self, split: str) -> bool:
        return self.path_for(split).is_file()

    def split(self, name: str, limit: int | None = None) -> Dataset:
        """Return the named split, optionally truncated to its first ``limit`` episodes."""
        if name not in self._cache:
            self._cache[name] = load_dataset(self.path_for(name))
        dataset = self._cache[name]
        if limit is None or limit >= len(dataset):
            return dataset
        return Dataset(
            demonstrations=dataset.demonstrations[:limit],
            class_set=dataset.class_set,
            grid_params=dataset.grid_params,
            sensor_params=dataset.sensor_params,
            split=dataset.split,
        )

    def clear_cache(self) -> None:
        self._cache.clear()
