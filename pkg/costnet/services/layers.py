"""
costnet/services/layers.py
==========================
Layers of the cost encoder with hand-written backward passes.

Tensors are ``(channels, height, width)`` float arrays. Layers keep no
state: ``forward`` returns the output and a cache, ``backward`` takes the
cache back and returns the input gradient plus the parameter gradients.
That way several forward passes can be alive at once.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Mapping
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import InvalidSettingError, ShapeMismatchError

PADDING_MODES: tuple[str, ...] = ("zeros", "circular")

Params = Mapping[str, np.ndarray]
Grads = dict[str, np.ndarray]


class Layer(ABC):
    """One differentiable stage of the encoder."""

    def __init__(self, name: str) -> None:
        self.name: str = name

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        return {}

    def initial_parameters(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        return {}

    @abstractmethod
    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        """Return the output and the cache needed by :meth:`backward`."""

    @abstractmethod
    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        """Return the input gradient and the parameter gradients."""


class Conv2d(Layer):
    """Same-size 2D convolution (odd kernel, stride 1)."""

    def __init__(self, name: str, in_channels: int, out_channels: int, kernel: int, padding_mode: str = "zeros") -> None:
        super().__init__(name)
        if kernel % 2 != 1:
            raise InvalidSettingError(f"{name}.kernel", kernel, "kernel size must be odd")
        if padding_mode not in PADDING_MODES:
            raise InvalidSettingError(f"{name}.padding_mode", padding_mode, f"expected one of {list(PADDING_MODES)}")
        self.in_channels: int = in_channels
        self.out_channels: int = out_channels
        self.kernel: int = kernel
        self.padding_mode: str = padding_mode

    @property
    def weight(self) -> str:
        return f"{self.name}.weight"

    @property
    def bias(self) -> str:
        return f"{self.name}.bias"

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        return {
            self.weight: (self.out_channels, self.in_channels, self.kernel, self.kernel),
            self.bias: (self.out_channels,),
        }

    def initial_parameters(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        bound: float = float(np.sqrt(1.0 / (self.in_channels * self.kernel * self.kernel)))
        return {
            self.weight: rng.uniform(-bound, bound, size=self.parameter_shapes()[self.weight]),
            self.bias: np.zeros(self.out_channels),
        }

    def _pad(self, x: np.ndarray) -> np.ndarray:
        p: int = self.kernel // 2
        if p == 0:
            return x
        mode: str = "wrap" if self.padding_mode == "circular" else "constant"
        return np.pad(x, ((0, 0), (p, p), (p, p)), mode=mode)

    def _fold(self, d_padded: np.ndarray, height: int, width: int) -> np.ndarray:
        p: int = self.kernel // 2
        if p == 0:
            return d_padded
        if self.padding_mode == "zeros":
            return d_padded[:, p : p + height, p : p + width]
        rows: np.ndarray = (np.arange(height + 2 * p) - p) % height
        cols: np.ndarray = (np.arange(width + 2 * p) - p) % width
        d_x: np.ndarray = np.zeros((d_padded.shape[0], height, width))
        np.add.at(d_x, (slice(None), rows[:, None], cols[None, :]), d_padded)
        return d_x

    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        if x.ndim != 3 or x.shape[0] != self.in_channels:
            raise ShapeMismatchError(f"{self.name} input", (self.in_channels, "H", "W"), x.shape)
        windows: np.ndarray = sliding_window_view(self._pad(x), (self.kernel, self.kernel), axis=(1, 2))
        out: np.ndarray = np.einsum("chwij,ocij->ohw", windows, params[self.weight], optimize=True)
        out += params[self.bias][:, None, None]
        return out, (windows, x.shape)

    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        windows, (channels, height, width) = cache
        d_weight: np.ndarray = np.einsum("ohw,chwij->ocij", d_out, windows, optimize=True)
        d_bias: np.ndarray = d_out.sum(axis=(1, 2))
        d_windows: np.ndarray = np.einsum("ohw,ocij->chwij", d_out, params[self.weight], optimize=True)
        p: int = self.kernel // 2
        d_padded: np.ndarray = np.zeros((channels, height + 2 * p, width + 2 * p))
        for i in range(self.kernel):
            for j in range(self.kernel):
                d_padded[:, i : i + height, j : j + width] += d_windows[:, :, :, i, j]
        return self._fold(d_padded, height, width), {self.weight: d_weight, self.bias: d_bias}


class ChannelAffine(Layer):
    """Learnable per-channel scale and shift."""

    def __init__(self, name: str, channels: int) -> None:
        super().__init__(name)
        self.channels: int = channels

    @property
    def scale(self) -> str:
        return f"{self.name}.scale"

    @property
    def shift(self) -> str:
        return f"{self.name}.shift"

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        return {self.scale: (self.channels,), self.shift: (self.channels,)}

    def initial_parameters(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        return {self.scale: np.ones(self.channels), self.shift: np.zeros(self.channels)}

    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        out = x * params[self.scale][:, None, None] + params[self.shift][:, None, None]
        return out, x

    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        x: np.ndarray = cache
        grads: Grads = {
            self.scale: (d_out * x).sum(axis=(1, 2)),
            self.shift: d_out.sum(axis=(1, 2)),
        }
        return d_out * params[self.scale][:, None, None], grads


class ReLU(Layer):
    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        mask: np.ndarray = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        return d_out * cache, {}


class MaxPool2x2(Layer):
    """2x2 max pooling with stride 2; records the winning position of each window."""

    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        channels, height, width = x.shape
        if height % 2 or width % 2:
            raise ShapeMismatchError(f"{self.name} input", "even height and width", x.shape)
        blocks: np.ndarray = (
            x.reshape(channels, height // 2, 2, width // 2, 2).transpose(0, 1, 3, 2, 4).reshape(channels, height // 2, width // 2, 4)
        )
        switches: np.ndarray = np.argmax(blocks, axis=3)
        out: np.ndarray = np.take_along_axis(blocks, switches[..., None], axis=3)[..., 0]
        return out, (switches, x.shape)

    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        switches, shape = cache
        return _scatter_blocks(d_out, switches, shape), {}


class MaxUnpool2x2(Layer):
    """Places each value at the position recorded by a :class:`MaxPool2x2`.

    Output channel ``c`` reuses the switches of pooled channel
    ``c % pooled_channels``, so the decoder may be wider than the encoder.
    """

    def __init__(self, name: str, source: str) -> None:
        super().__init__(name)
        self.source: str = source

    def forward(self, params: Params, x: np.ndarray, caches: Mapping[str, Any]) -> tuple[np.ndarray, Any]:
        switches, (pooled_channels, height, width) = caches[self.source]
        if x.shape[1:] != switches.shape[1:]:
            raise ShapeMismatchError(f"{self.name} input", switches.shape[1:], x.shape[1:])
        mapped: np.ndarray = switches[np.arange(x.shape[0]) % pooled_channels]
        out: np.ndarray = _scatter_blocks(x, mapped, (x.shape[0], height, width))
        return out, mapped

    def backward(self, params: Params, cache: Any, d_out: np.ndarray) -> tuple[np.ndarray, Grads]:
        mapped: np.ndarray = cache
        channels, height, width = d_out.shape
        blocks = d_out.reshape(channels, height // 2, 2, width // 2, 2).transpose(0, 1, 3, 2, 4).reshape(
            channels, height // 2, width // 2, 4
        )
        return np.take_along_axis(blocks, mapped[..., None], axis=3)[..., 0], {}


def _scatter_blocks(values: np.ndarray, switches: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of the 2x2 block gather: put ``values`` at ``switches``, zeros elsewhere."""
    channels, height, width = shape
    blocks: np.ndarray = np.zeros((channels, height // 2, width // 2, 4))
    np.put_along_axis(blocks, switches[..., None], values[..., None], axis=3)
    return blocks.reshape(channels, height // 2, width // 2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(channels, height, width)
