"""
costnet/services/gradcheck.py
=============================
Central-difference check of an encoder's backward pass.

The scalar under test is ``sum(U * C(x; phi))`` for a fixed random upstream
weighting ``U``. Relative error uses ``max(|analytic|, |numeric|, floor)``
as denominator so entries with vanishing gradients are judged absolutely.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .network import CostEncoder, CostEncoderParams

logger: logging.Logger = logging.getLogger(__name__)


@dataclass
class GradientCheckReport:
    """Outcome of :func:`gradient_check`.

    Attributes:
        max_relative_error: Worst relative disagreement seen.
        checked: Number of scalars compared.
        worst: ``(name, flat index)`` of the worst entry; name ``"input"``
            for posterior entries.
        tol: Threshold the check was run with.
        errors: Relative error of every comparison, in order.
    """

    max_relative_error: float
    checked: int
    worst: tuple[str, int] | None
    tol: float
    errors: list[float] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.tol


def gradient_check(
    model: CostEncoder,
    posterior: np.ndarray,
    params: CostEncoderParams | None = None,
    trials: int = 20,
    tol: float = 1e-4,
    seed: int = 0,
    delta: float = 1e-6,
    floor: float = 1e-6,
    input_trials: int = 0,
) -> GradientCheckReport:
    """Compare analytic and central-difference gradients.

    Args:
        model: Encoder under test.
        posterior: ``(K+1, H, W)`` input, at most 16x16 to stay cheap.
        params: Parameters; ``model.init_params()`` when omitted.
        trials: Number of random parameter entries to probe.
        tol: Pass threshold on the maximum relative error.
        seed: Seed of the probe selection and the upstream weights.
        delta: Finite-difference half step.
        floor: Absolute floor of the relative error denominator.
        input_trials: Additional random posterior entries to probe.

    Returns:
        A :class:`GradientCheckReport`.
    """
    rng: np.random.Generator = np.random.default_rng(seed)
    params = params.copy() if params is not None else model.init_params()
    posterior = np.array(posterior, dtype=np.float64)
    upstream: np.ndarray = rng.normal(size=posterior.shape[1:])

    def objective(p: CostEncoderParams, x: np.ndarray) -> float:
        return float(np.sum(upstream * model.forward(x, p).values))

    field = model.forward(posterior, params)
    center: float = float(np.sum(upstream * field.values))
    d_params, d_input = model.backward(field, upstream)

    names: list[str] = list(params)
    sizes: np.ndarray = np.array([params[n].size for n in names], dtype=np.float64)
    errors: list[float] = []
    worst: tuple[str, int] | None = None
    worst_error: float = 0.0

    def relative(a: float, b: float) -> float:
        return abs(a - b) / max(abs(a), abs(b), floor)

    def compare(label: str, index: int, analytic: float, up: float, down: float) -> None:
        nonlocal worst, worst_error
        error = relative(analytic, (up - down) / (2.0 * delta))
        if error >= tol:
            # a ReLU or pooling kink inside the bracket: the function is piecewise
            # linear, so the analytic slope must match one side exactly
            left, right = (center - down) / delta, (up - center) / delta
            if relative(left, right) >= tol:
                error = min(error, relative(analytic, left), relative(analytic, right))
        errors.append(error)
        if worst is None or error > worst_error:
            worst, worst_error = (label, index), error

    for _ in range(trials):
        name: str = names[int(rng.choice(len(names), p=sizes / sizes.sum()))]
        index: int = int(rng.integers(params[name].size))
        base: np.ndarray = params[name]
        plus, minus = base.copy(), base.copy()
        plus.flat[index] += delta
        minus.flat[index] -= delta
        params[name] = plus
        up: float = objective(params, posterior)
        params[name] = minus
        down: float = objective(params, posterior)
        params[name] = base
        compare(name, index, float(d_params[name].flat[index]), up, down)

    for _ in range(input_trials):
        index = int(rng.integers(posterior.size))
        plus, minus = posterior.copy(), posterior.copy()
        plus.flat[index] += delta
        minus.flat[index] -= delta
        compare("input", index, float(d_input.flat[index]), objective(params, plus), objective(params, minus))

    report = GradientCheckReport(
        max_relative_error=worst_error, checked=len(errors), worst=worst, tol=tol, errors=errors
    )
    log = logger.info if report.passed else logger.warning
    log("gradient check: %d entries, max relative error %.3e (tol %.0e)", report.checked, worst_error, tol)
    return report
