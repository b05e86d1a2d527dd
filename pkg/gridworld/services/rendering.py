"""
gridworld/services/rendering.py
===============================
Binary PPM (P6) images for grids, maps, cost fields and paths.

Images are ``(height, width, 3)`` uint8 arrays; one grid cell becomes a
``scale x scale`` block.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from .classes import ClassSet
from .exceptions import ImageFormatError

logger: logging.Logger = logging.getLogger(__name__)

UNKNOWN_COLOR: tuple[int, int, int] = (0, 0, 0)
PATH_COLOR: tuple[int, int, int] = (255, 64, 64)
MISSING_COLOR: tuple[int, int, int] = (200, 0, 0)


def write_ppm(path: str | Path, image: np.ndarray) -> Path:
    """Write an RGB image as binary PPM."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ImageFormatError("image", f"expected an (H, W, 3) array, got shape {image.shape}")
    pixels: np.ndarray = np.clip(image, 0, 255).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header: bytes = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())
    logger.debug("wrote %dx%d image to %s", pixels.shape[1], pixels.shape[0], path)
    return path


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary PPM written by :func:`write_ppm`."""
    data: bytes = Path(path).read_bytes()
    fields: list[bytes] = []
    offset: int = 0
    while len(fields) < 4:
        end = data.index(b"\n", offset)
        fields.extend(data[offset:end].split())
        offset = end + 1
    if fields[0] != b"P6":
        raise ImageFormatError(str(path), "not a binary PPM")
    width, height = int(fields[1]), int(fields[2])
    return np.frombuffer(data[offset:], dtype=np.uint8, count=width * height * 3).reshape(height, width, 3)


def upscale(image: np.ndarray, scale: int) -> np.ndarray:
    return np.repeat(np.repeat(image, scale, axis=0), scale, axis=1)


def class_image(labels: np.ndarray, class_set: ClassSet, unknown: np.ndarray | None = None) -> np.ndarray:
    """Colour each cell by its class; cells flagged in ``unknown`` are black."""
    palette: np.ndarray = np.asarray(class_set.colors, dtype=np.uint8)
    image: np.ndarray = palette[np.asarray(labels, dtype=np.int64)]
    if unknown is not None:
        image[np.asarray(unknown, dtype=bool)] = UNKNOWN_COLOR
    return image


def heatmap(
    values: np.ndarray,
    low: tuple[int, int, int] = (0, 0, 0),
    high: tuple[int, int, int] = (255, 255, 255),
    vmin: float | None = None,
    vmax: float | None = None,
) -> np.ndarray:
    """Linear two-colour ramp over the finite values; non-finite cells are red."""
    values = np.asarray(values, dtype=np.float64)
    finite: np.ndarray = np.isfinite(values)
    image: np.ndarray = np.empty(values.shape + (3,), dtype=np.uint8)
    image[...] = MISSING_COLOR
    if not finite.any():
        return image
    lo: float = float(values[finite].min()) if vmin is None else vmin
    hi: float = float(values[finite].max()) if vmax is None else vmax
    span: float = hi - lo
    weight: np.ndarray = np.zeros(values.shape) if span <= 0 else np.clip((values - lo) / span, 0.0, 1.0)
    ramp = (1.0 - weight[..., None]) * np.asarray(low) + weight[..., None] * np.asarray(high)
    image[finite] = np.rint(ramp[finite]).astype(np.uint8)
    return image


def overlay_cells(
    image: np.ndarray,
    cells: Iterable[tuple[int, int]],
    color: tuple[int, int, int] = PATH_COLOR,
) -> np.ndarray:
    """Copy of a cell-resolution image with ``cells`` painted in ``color``."""
    result: np.ndarray = np.array(image, copy=True)
    for row, col in cells:
        result[row, col] = color
    return result
