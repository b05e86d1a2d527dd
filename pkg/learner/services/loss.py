"""
learner/services/loss.py
========================
Negative log-likelihood of the demonstrations and its gradient.

With ``pi(u) ~ exp(-Q(u) / alpha)`` the step loss ``-log pi(u*)`` has

    dL/dQ(u) = (1 / alpha) * (1{u = u*} - pi(u))

for every control with finite Q. Each ``Q(x_t, u)`` is a minimum over
trajectories, and the visitation counts of the minimiser are its gradient
with respect to the per-cell costs. From there the chain runs through the
cost encoder to the class posterior, through the softmax to the log-odds,
and through the linear map encoder to ``Psi``.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import sparse

from costnet.services import CostEncoderParams
from gridworld.services import CONTROLS, AgentState
from planner.services import PlanResult, subgradient
from semantic_map.services import LogOddsGradient, MapGradients, backprop_to_psi, softmax_backward

from .exceptions import LearnerError, NonFiniteIntermediateError

if TYPE_CHECKING:
    from .model import NavigationModel
    from .tape import EpisodeTape

logger: logging.Logger = logging.getLogger(__name__)


def nll_loss(policy: np.ndarray, control: int, clamp: float | None = None) -> float:
    """``-log pi(u*)``, capped at ``clamp`` when given.

    A zero probability gives ``inf`` without a clamp.
    """
    probability: float = float(policy[int(control)])
    loss: float = -math.log(probability) if probability > 0 else math.inf
    if clamp is not None:
        loss = min(loss, clamp)
    return loss


def loss_coefficients(q: np.ndarray, policy: np.ndarray, control: int, alpha: float) -> np.ndarray:
    """``dL/dQ(x_t, u)``; zero for controls with infinite Q."""
    finite: np.ndarray = np.isfinite(q)
    coefficients: np.ndarray = np.zeros(len(q))
    coefficients[finite] = -policy[finite] / alpha
    if finite[int(control)]:
        coefficients[int(control)] += 1.0 / alpha
    return coefficients


def cost_gradient(result: PlanResult, x_t: AgentState, coefficients: np.ndarray) -> sparse.csr_matrix:
    """Sum over controls of ``coefficient[u]`` times the arrival counts of ``Q(x_t, u)``'s path."""
    gradient = sparse.csr_matrix(result.shape, dtype=np.float64)
    for u in CONTROLS:
        if coefficients[u] == 0.0:
            continue
        gradient = gradient + subgradient(result, x_t, u).cell_gradient(result.shape, float(coefficients[u])).tocsr()
    return gradient


class EpisodeGradient(NamedTuple):
    """Gradients of one episode's summed loss."""

    d_phi: CostEncoderParams
    d_psi: np.ndarray
    loss: float


def loss_gradient_step(tape: EpisodeTape, model: NavigationModel) -> EpisodeGradient:
    """Differentiate the summed loss of ``tape`` with respect to ``phi`` and ``Psi``.

    Args:
        tape: A tape recorded with :class:`LearnedCostStrategy` over ``model``
            and the A* planner, caches kept.
        model: The model that produced the tape.

    Returns:
        ``(d_phi, d_psi, loss)``.

    Raises:
        LearnerError: If the tape cannot be differentiated.
        NonFiniteIntermediateError: If a loss or gradient stops being finite.
    """
    if not tape.differentiable:
        raise LearnerError(
            message="tape has no encoder caches or no A* plans",
            details={"planner": tape.planner, "steps": len(tape)},
        )
    d_phi: CostEncoderParams = model.params.zeros_like()
    map_grads: MapGradients = MapGradients.zeros(model.class_count)

    for record in tape.steps:
        if not math.isfinite(record.loss):
            raise NonFiniteIntermediateError("loss", record.index, state=list(record.state))
        coefficients = loss_coefficients(record.q, record.policy, record.control, tape.alpha)
        if not np.all(np.isfinite(coefficients)):
            raise NonFiniteIntermediateError("loss coefficients", record.index, q=record.q.tolist())
        if not np.any(coefficients):
            continue

        cells = cost_gradient(record.plan, record.state, coefficients)
        step_phi, d_posterior = model.encoder.backward(record.cost_field, cells)
        if not step_phi.is_finite():
            raise NonFiniteIntermediateError("encoder gradient", record.index)
        d_logodds: np.ndarray = softmax_backward(record.posterior, d_posterior, axis=0)
        if not np.all(np.isfinite(d_logodds)):
            raise NonFiniteIntermediateError("log-odds gradient", record.index)
        backprop_to_psi(record.map, LogOddsGradient.restrict(record.map, d_logodds), map_grads)
        d_phi.add_(step_phi)

    if not np.all(np.isfinite(map_grads.d_psi)):
        raise NonFiniteIntermediateError("psi gradient", len(tape) - 1)
    logger.debug("episode gradient over %d steps, loss=%.4f", len(tape), tape.loss)
    return EpisodeGradient(d_phi=d_phi, d_psi=map_grads.d_psi, loss=tape.loss)
