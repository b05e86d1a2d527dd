"""
semantic_map/services/export.py
===============================
Map snapshots: CSV of stored log-odds, argmax-class images and per-cell
point counts.
"""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

import numpy as np
import pandas as pd

from gridworld.services.classes import ClassSet
from gridworld.services.rendering import class_image, heatmap, upscale, write_ppm
from sensor.services.lidar import PointCloud

from .logodds import LogOddsMap, posterior_grid


def map_snapshot_frame(log_map: LogOddsMap) -> pd.DataFrame:
    """One row per stored cell: ``j, row, col, h0..hK``."""
    rows, cols = np.divmod(log_map.cells, log_map.shape[1])
    frame = pd.DataFrame({"j": log_map.cells, "row": rows, "col": cols})
    for k in range(log_map.class_count):
        frame[f"h{k}"] = log_map.logodds[:, k]
    return frame


def write_map_snapshot(log_map: LogOddsMap, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    map_snapshot_frame(log_map).to_csv(path, index=False)
    return path


def argmax_image(log_map: LogOddsMap, class_set: ClassSet, scale: int = 8) -> np.ndarray:
    """Most likely class per cell; never-observed cells are black."""
    labels: np.ndarray = np.argmax(posterior_grid(log_map), axis=0)
    return upscale(class_image(labels, class_set, unknown=~log_map.observed_mask()), scale)


def write_argmax_ppm(log_map: LogOddsMap, class_set: ClassSet, path: str | Path, scale: int = 8) -> Path:
    return write_ppm(path, argmax_image(log_map, class_set, scale))


def class_posterior_images(log_map: LogOddsMap, scale: int = 8) -> list[np.ndarray]:
    """One grayscale image per class, probability 0 black to 1 white."""
    probabilities: np.ndarray = posterior_grid(log_map)
    return [upscale(heatmap(p, vmin=0.0, vmax=1.0), scale) for p in probabilities]


def point_counts(clouds: Iterable[PointCloud], shape: tuple[int, int]) -> np.ndarray:
    """Number of non-free returns that landed in each cell."""
    counts: np.ndarray = np.zeros(shape, dtype=np.int64)
    for cloud in clouds:
        for point in cloud.points:
            if not point.is_free and 0 <= point.cell.row < shape[0] and 0 <= point.cell.col < shape[1]:
                counts[point.cell.row, point.cell.col] += 1
    return counts
