"""
planner/services/policy.py
==========================
Boltzmann policy over the four controls.

``pi(u) ~ exp(-Q(u) / alpha)``; controls with infinite Q get probability
exactly 0 and the softmax runs over the finite ones only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp, softmax

from .exceptions import InvalidPlanningInputError, UnreachableGoalError


def _finite_mask(q_values: np.ndarray, alpha: float) -> np.ndarray:
    if alpha <= 0 or not math.isfinite(alpha):
        raise InvalidPlanningInputError("temperature must be positive and finite", alpha=alpha)
    finite: np.ndarray = np.isfinite(q_values)
    if not finite.any():
        raise UnreachableGoalError()
    return finite


def boltzmann(q_values: np.ndarray, alpha: float) -> np.ndarray:
    """Return the Boltzmann distribution over controls.

    Raises:
        UnreachableGoalError: If every Q is infinite.
        InvalidPlanningInputError: If ``alpha`` is not positive.
    """
    q_values = np.asarray(q_values, dtype=np.float64)
    finite = _finite_mask(q_values, alpha)
    probabilities: np.ndarray = np.zeros_like(q_values)
    probabilities[finite] = softmax(-q_values[finite] / alpha)
    return probabilities


def log_boltzmann(q_values: np.ndarray, alpha: float) -> np.ndarray:
    """Log-probabilities of :func:`boltzmann`; ``-inf`` for infinite-Q controls."""
    q_values = np.asarray(q_values, dtype=np.float64)
    finite = _finite_mask(q_values, alpha)
    scaled: np.ndarray = -q_values[finite] / alpha
    log_probabilities: np.ndarray = np.full_like(q_values, -math.inf)
    log_probabilities[finite] = scaled - logsumexp(scaled)
    return log_probabilities


def greedy_control(policy: np.ndarray) -> int:
    """Index of the most likely control; ties go to the earliest control."""
    return int(np.argmax(policy))
