"""
costnet/services/optimizer.py
=============================
Adam over a flat mapping of named parameter arrays.

The same optimizer updates the encoder weights and the inverse observation
matrix ``Psi``; both are just entries of the mapping it steps.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, MutableMapping
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidSettingError, NonFiniteGradientError

logger: logging.Logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First and second moment estimates and the step counter."""

    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "m": {n: {"shape": list(a.shape), "data": a.ravel().tolist()} for n, a in self.m.items()},
            "v": {n: {"shape": list(a.shape), "data": a.ravel().tolist()} for n, a in self.v.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AdamState":
        def arrays(block: Mapping) -> dict[str, np.ndarray]:
            return {n: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"]) for n, v in block.items()}

        return cls(t=int(data["t"]), m=arrays(data["m"]), v=arrays(data["v"]))


def _check_finite(grads: Mapping[str, np.ndarray]) -> None:
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(name)


def adam_step(
    params: MutableMapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    lr: float,
    beta1: float,
    beta2: float,
    eps_adam: float,
    t: int,
    state: AdamState | None = None,
) -> MutableMapping[str, np.ndarray]:
    """One bias-corrected Adam update.

    Args:
        params: Parameters to update; entries are replaced with new arrays.
        grads: Gradients by parameter name. Names absent here are skipped.
        lr: Learning rate.
        beta1: First moment decay.
        beta2: Second moment decay.
        eps_adam: Denominator guard.
        t: Step number, starting at 1.
        state: Moment estimates, updated in place. Fresh zeros when omitted.

    Returns:
        ``params``.

    Raises:
        NonFiniteGradientError: If any gradient has a NaN or infinity. No
            parameter is touched in that case.
        InvalidSettingError: If ``t < 1``.
    """
    if t < 1:
        raise InvalidSettingError("t", t, "adam step number must be >= 1")
    _check_finite(grads)
    state = state if state is not None else AdamState()
    correction1: float = 1.0 - beta1**t
    correction2: float = 1.0 - beta2**t
    for name, grad in grads.items():
        grad = np.asarray(grad, dtype=np.float64)
        m = state.m.get(name, np.zeros_like(grad))
        v = state.v.get(name, np.zeros_like(grad))
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        params[name] = params[name] - lr * m_hat / (np.sqrt(v_hat) + eps_adam)
    state.t = t
    return params


class Adam:
    """Stateful wrapper around :func:`adam_step`."""

    def __init__(
        self,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps_adam: float = 1e-8,
        state: AdamState | None = None,
    ) -> None:
        self.lr: float = lr
        self.beta1: float = beta1
        self.beta2: float = beta2
        self.eps_adam: float = eps_adam
        self.state: AdamState = state or AdamState()

    @property
    def t(self) -> int:
        return self.state.t

    def step(self, params: MutableMapping[str, np.ndarray], grads: Mapping[str, np.ndarray]) -> None:
        adam_step(params, grads, self.lr, self.beta1, self.beta2, self.eps_adam, self.state.t + 1, self.state)
        logger.debug("adam step %d over %d arrays", self.state.t, len(grads))
