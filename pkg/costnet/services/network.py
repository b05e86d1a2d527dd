"""
costnet/services/network.py
===========================
Cost encoders: class posteriors ``(K+1, H, W)`` in, per-cell arrival cost
``(H, W)`` out.

Two encoders share one interface:

* :class:`FcnCostEncoder`, a one-scale encoder-decoder::

      conv3x3(K+1 -> c1) + affine + relu
      -> maxpool 2x2 (switches kept)
      -> conv3x3(c1 -> c2) + affine + relu
      -> unpool with the kept switches
      -> conv3x3(c2 -> c1) + affine + relu
      -> conv1x1(c1 -> 1) -> relu

* :class:`LinearCostEncoder`, ``relu(conv1x1(K+1 -> 1))``: a per-class cost
  table.

The final ReLU keeps every cost non-negative. Encoders hold no activations:
:meth:`CostEncoder.forward` returns a :class:`CostField` that carries them,
and :meth:`CostEncoder.backward` consumes it.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import sparse

from .exceptions import BackwardBeforeForwardError, CostNetError, ShapeMismatchError
from .layers import PADDING_MODES, ChannelAffine, Conv2d, Layer, MaxPool2x2, MaxUnpool2x2, ReLU

logger: logging.Logger = logging.getLogger(__name__)

ENCODER_KINDS: tuple[str, ...] = ("fcn", "linear")


# ──────────────────────────────────────────────
# Configuration and parameters
# ──────────────────────────────────────────────


@dataclass(frozen=True)
class EncoderConfig:
    """Architecture of a cost encoder.

    Attributes:
        kind: ``"fcn"`` or ``"linear"``.
        channels: ``(c1, c2)`` widths of the FCN.
        output_bias: Initial bias of the output convolution.
        padding_mode: ``"zeros"``; ``"circular"`` wraps the grid as a torus.
        seed: Seed of the parameter initialisation.
    """

    kind: str = "fcn"
    channels: tuple[int, int] = (32, 64)
    output_bias: float = 1.0
    padding_mode: str = "zeros"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ENCODER_KINDS:
            raise CostNetError(message=f"unknown encoder kind {self.kind!r}", details={"kinds": list(ENCODER_KINDS)})
        if len(self.channels) != 2 or min(self.channels) < 1:
            raise CostNetError(message=f"invalid channel plan {self.channels}", details={})
        if self.padding_mode not in PADDING_MODES:
            raise CostNetError(message=f"unknown padding mode {self.padding_mode!r}", details={})

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "channels": list(self.channels),
            "output_bias": self.output_bias,
            "padding_mode": self.padding_mode,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EncoderConfig":
        return cls(
            kind=str(data.get("kind", "fcn")),
            channels=tuple(int(c) for c in data.get("channels", (32, 64))),
            output_bias=float(data.get("output_bias", 1.0)),
            padding_mode=str(data.get("padding_mode", "zeros")),
            seed=int(data.get("seed", 0)),
        )


class CostEncoderParams(Mapping[str, np.ndarray]):
    """Named parameter arrays of an encoder (``phi``), in layer order.

    Arrays are replaced on update, never written in place, so a
    :class:`CostField` keeps seeing the parameters it was computed with.
    """

    def __init__(self, arrays: Mapping[str, np.ndarray]) -> None:
        self._arrays: dict[str, np.ndarray] = {name: np.array(a, dtype=np.float64) for name, a in arrays.items()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if name not in self._arrays:
            raise KeyError(name)
        value = np.array(value, dtype=np.float64)
        if value.shape != self._arrays[name].shape:
            raise ShapeMismatchError(f"parameter {name}", self._arrays[name].shape, value.shape)
        self._arrays[name] = value

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def __repr__(self) -> str:
        shapes = ", ".join(f"{n}={a.shape}" for n, a in self._arrays.items())
        return f"CostEncoderParams({shapes})"

    @property
    def size(self) -> int:
        """Total number of scalars."""
        return int(sum(a.size for a in self._arrays.values()))

    def copy(self) -> "CostEncoderParams":
        return CostEncoderParams({n: a.copy() for n, a in self._arrays.items()})

    def zeros_like(self) -> "CostEncoderParams":
        return CostEncoderParams({n: np.zeros_like(a) for n, a in self._arrays.items()})

    def add_(self, other: Mapping[str, np.ndarray]) -> "CostEncoderParams":
        """Accumulate ``other`` into these arrays."""
        for name, value in other.items():
            self._arrays[name] = self._arrays[name] + value
        return self

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(a))) for a in self._arrays.values())

    def snapshot(self) -> dict[str, np.ndarray]:
        return dict(self._arrays)

    def to_dict(self) -> dict:
        return {n: {"shape": list(a.shape), "data": a.ravel().tolist()} for n, a in self._arrays.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CostEncoderParams":
        return cls({n: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"]) for n, v in data.items()})


@dataclass(eq=False)
class CostField:
    """Per-cell arrival cost ``C(j) >= 0`` plus what backward needs.

    Attributes:
        values: ``(height, width)`` costs.
        input_shape: Shape of the posterior the field was computed from.
    """

    values: np.ndarray
    input_shape: tuple[int, ...] | None = None
    _params: dict[str, np.ndarray] | None = field(default=None, repr=False)
    _caches: dict[str, Any] | None = field(default=None, repr=False)
    _owner: int | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values: np.ndarray) -> "CostField":
        """A fixed cost field, such as the expert's; it has no backward."""
        return cls(values=np.asarray(values, dtype=np.float64))

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.values.shape)  # type: ignore[return-value]

    @property
    def differentiable(self) -> bool:
        return self._caches is not None

    def release(self) -> None:
        """Drop the cached activations."""
        self._caches = None
        self._params = None


# ──────────────────────────────────────────────
# Encoders
# ──────────────────────────────────────────────


class CostEncoder(ABC):
    """Stateless differentiable map from class posteriors to costs."""

    def __init__(self, config: EncoderConfig, class_count: int) -> None:
        self.config: EncoderConfig = config
        self.class_count: int = class_count
        self.layers: list[Layer] = self._build_layers()

    @abstractmethod
    def _build_layers(self) -> list[Layer]: ...

    def check_input(self, posterior: np.ndarray) -> None:
        if posterior.ndim != 3 or posterior.shape[0] != self.class_count:
            raise ShapeMismatchError("posterior", (self.class_count, "H", "W"), posterior.shape)

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for layer in self.layers:
            shapes.update(layer.parameter_shapes())
        return shapes

    def init_params(self, seed: int | None = None) -> CostEncoderParams:
        """Uniform(-a, a) weights with ``a = sqrt(1 / fan_in)``; output bias from the config."""
        rng: np.random.Generator = np.random.default_rng(self.config.seed if seed is None else seed)
        arrays: dict[str, np.ndarray] = {}
        for layer in self.layers:
            arrays.update(layer.initial_parameters(rng))
        head: Conv2d = self.layers[-2]  # type: ignore[assignment]
        arrays[head.bias] = np.full(head.out_channels, self.config.output_bias)
        return CostEncoderParams(arrays)

    def _check_params(self, params: Mapping[str, np.ndarray]) -> None:
        for name, shape in self.parameter_shapes().items():
            if name not in params:
                raise CostNetError(message=f"missing parameter {name!r}", details={"parameter": name})
            if params[name].shape != shape:
                raise ShapeMismatchError(f"parameter {name}", shape, params[name].shape)

    def forward(self, posterior: np.ndarray, params: CostEncoderParams) -> CostField:
        """Compute the cost field of one posterior grid.

        Raises:
            ShapeMismatchError: If the posterior or a parameter has the wrong shape.
        """
        posterior = np.asarray(posterior, dtype=np.float64)
        self.check_input(posterior)
        self._check_params(params)
        snapshot: dict[str, np.ndarray] = params.snapshot() if isinstance(params, CostEncoderParams) else dict(params)
        caches: dict[str, Any] = {}
        x: np.ndarray = posterior
        for layer in self.layers:
            x, caches[layer.name] = layer.forward(snapshot, x, caches)
        return CostField(
            values=x[0],
            input_shape=posterior.shape,
            _params=snapshot,
            _caches=caches,
            _owner=id(self),
        )

    def backward(
        self,
        cost_field: CostField,
        upstream: np.ndarray | sparse.spmatrix | sparse.sparray,
    ) -> tuple[CostEncoderParams, np.ndarray]:
        """Gradients of ``sum(upstream * C)``.

        Args:
            cost_field: Output of :meth:`forward` on this encoder.
            upstream: ``(height, width)`` weights on the costs, dense or sparse.

        Returns:
            ``(d_phi, d_posterior)``.

        Raises:
            BackwardBeforeForwardError: If the field carries no activations.
            ShapeMismatchError: If ``upstream`` does not cover the grid.
        """
        if not cost_field.differentiable or cost_field._owner != id(self):
            raise BackwardBeforeForwardError()
        if sparse.issparse(upstream):
            if upstream.shape != cost_field.shape:
                raise ShapeMismatchError("upstream gradient", cost_field.shape, upstream.shape)
            upstream = upstream.toarray()
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != cost_field.shape:
            raise ShapeMismatchError("upstream gradient", cost_field.shape, upstream.shape)

        params: dict[str, np.ndarray] = cost_field._params  # type: ignore[assignment]
        grads: dict[str, np.ndarray] = {name: np.zeros_like(value) for name, value in params.items()}
        d: np.ndarray = upstream[None, :, :]
        for layer in reversed(self.layers):
            d, layer_grads = layer.backward(params, cost_field._caches[layer.name], d)
            for name, value in layer_grads.items():
                grads[name] += value
        return CostEncoderParams(grads), d


class FcnCostEncoder(CostEncoder):
    """One pooling stage encoder-decoder for desk-scale grids."""

    def _build_layers(self) -> list[Layer]:
        c1, c2 = self.config.channels
        pad: str = self.config.padding_mode
        return [
            Conv2d("enc1", self.class_count, c1, 3, pad),
            ChannelAffine("enc1_affine", c1),
            ReLU("enc1_relu"),
            MaxPool2x2("pool"),
            Conv2d("mid", c1, c2, 3, pad),
            ChannelAffine("mid_affine", c2),
            ReLU("mid_relu"),
            MaxUnpool2x2("unpool", source="pool"),
            Conv2d("dec1", c2, c1, 3, pad),
            ChannelAffine("dec1_affine", c1),
            ReLU("dec1_relu"),
            Conv2d("head", c1, 1, 1, pad),
            ReLU("out_relu"),
        ]

    def check_input(self, posterior: np.ndarray) -> None:
        super().check_input(posterior)
        _, height, width = posterior.shape
        if height < 4 or width < 4 or height % 2 or width % 2:
            raise ShapeMismatchError("posterior", "height and width even and at least 4", posterior.shape)


class LinearCostEncoder(CostEncoder):
    """``relu(w . p_j + b)``: one learned cost per class."""

    def _build_layers(self) -> list[Layer]:
        return [Conv2d("head", self.class_count, 1, 1, self.config.padding_mode), ReLU("out_relu")]


def build_encoder(config: EncoderConfig, class_count: int) -> CostEncoder:
    """Instantiate the encoder named by ``config.kind``."""
    encoder: CostEncoder = (FcnCostEncoder if config.kind == "fcn" else LinearCostEncoder)(config, class_count)
    logger.debug(
        "built %s encoder for %d classes with %d parameters",
        config.kind,
        class_count,
        sum(int(np.prod(s)) for s in encoder.parameter_shapes().values()),
    )
    return encoder
