"""
policy_lab/services/bellman.py
==============================
Hard-min and soft-min Bellman operators in the cost convention.

Both are Jacobi sweeps: the new table is computed from the old one only::

    hard:  Q'(x, u) = c(x, u) + gamma * min_u' Q(f(x, u), u')
    soft:  Q'(x, u) = c(x, u) - gamma * alpha * log sum_u' exp(-Q(f(x, u), u') / alpha)

The goal's value is pinned to 0 and its row of Q stays 0. Invalid controls
keep ``Q = inf`` and drop out of both the min and the log-sum-exp.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .exceptions import PolicyLabError
from .mdp import GridMDP

OPERATORS: tuple[str, ...] = ("hard", "soft")


def initial_table(mdp: GridMDP) -> np.ndarray:
    """Zero for every valid control, ``inf`` for the rest."""
    return np.where(mdp.valid, 0.0, np.inf)


def hard_values(q: np.ndarray) -> np.ndarray:
    return q.min(axis=1)


def soft_values(q: np.ndarray, alpha: float) -> np.ndarray:
    """``-alpha * logsumexp(-Q / alpha)`` per state; ``inf`` for states without controls."""
    return -alpha * logsumexp(-q / alpha, axis=1)


def _backup(mdp: GridMDP, values: np.ndarray, gamma: float) -> np.ndarray:
    values = values.copy()
    values[mdp.goal_index] = 0.0
    successor_values: np.ndarray = values[np.where(mdp.valid, mdp.successor, 0)]
    future: np.ndarray = np.zeros_like(successor_values) if gamma == 0.0 else gamma * successor_values
    q: np.ndarray = np.where(mdp.valid, mdp.step_cost + future, np.inf)
    q[mdp.goal_index] = 0.0
    return q


def _check(gamma: float, alpha: float | None = None) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise PolicyLabError(message=f"discount must lie in [0, 1], got {gamma}", details={"gamma": gamma})
    if alpha is not None and not alpha > 0.0:
        raise PolicyLabError(message=f"temperature must be positive, got {alpha}", details={"alpha": alpha})


def bellman_hard(q: np.ndarray, mdp: GridMDP, gamma: float) -> np.ndarray:
    """One hard-min sweep."""
    _check(gamma)
    return _backup(mdp, hard_values(q), gamma)


def bellman_soft(q: np.ndarray, mdp: GridMDP, gamma: float, alpha: float) -> np.ndarray:
    """One soft-min (log-sum-exp) sweep; scipy's ``logsumexp`` keeps it stable."""
    _check(gamma, alpha)
    return _backup(mdp, soft_values(q, alpha), gamma)


def apply_operator(operator: str, q: np.ndarray, mdp: GridMDP, gamma: float, alpha: float) -> np.ndarray:
    if operator == "hard":
        return bellman_hard(q, mdp, gamma)
    if operator == "soft":
        return bellman_soft(q, mdp, gamma, alpha)
    raise PolicyLabError(message=f"unknown operator {operator!r}", details={"operators": list(OPERATORS)})
