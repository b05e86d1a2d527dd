"""
policy_lab/services/comparison.py
=================================
Side-by-side comparison of the Boltzmann-over-optimal-Q policy (hard-min)
and the maximum-entropy policy (soft-min) on one grid.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from gridworld.services.dynamics import AgentState

from .mdp import GridMDP, bordered_grid_mdp
from .value_iteration import GreedyPath, QTable, greedy_rollout, value_iteration

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolicyLabConfig:
    """Settings of the comparison run."""

    size: int = 16
    gamma: float = 0.95
    alpha: float = 1.0
    tol: float = 1e-8
    max_iters: int = 10_000

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PolicyLabConfig":
        return cls(
            size=int(data.get("size", 16)),
            gamma=float(data.get("gamma", 0.95)),
            alpha=float(data.get("alpha", 1.0)),
            tol=float(data.get("tol", 1e-8)),
            max_iters=int(data.get("max_iters", 10_000)),
        )


def argmax_agreement(hard: QTable, soft: QTable) -> float:
    """Fraction of non-goal states whose soft argmax is one of the hard-optimal controls."""
    mdp: GridMDP = hard.mdp
    agree = total = 0
    for index in range(mdp.size):
        row = hard.q[index]
        if index == mdp.goal_index or not np.isfinite(row).any():
            continue
        optimal = np.flatnonzero(np.isclose(row, row.min(), rtol=0.0, atol=1e-9))
        total += 1
        agree += int(np.argmin(soft.q[index])) in optimal
    return agree / total if total else float("nan")


@dataclass(eq=False)
class PolicyComparison:
    """Both fixed points and the checks run on them."""

    mdp: GridMDP
    start: AgentState
    hard: QTable
    soft: QTable
    hard_path: GreedyPath
    soft_path: GreedyPath
    agreement: float
    soft_below_hard: bool

    @property
    def converged(self) -> bool:
        return self.hard.converged and self.soft.converged

    def summary(self) -> dict:
        return {
            "agreement": self.agreement,
            "soft_below_hard": self.soft_below_hard,
            "hard_converged": self.hard.converged,
            "soft_converged": self.soft.converged,
            "hard_iterations": self.hard.iterations,
            "soft_iterations": self.soft.iterations,
            "hard_reaches_goal": self.hard_path.reached,
            "soft_reaches_goal": self.soft_path.reached,
        }


def compare_policies(mdp: GridMDP, start: AgentState, config: PolicyLabConfig) -> PolicyComparison:
    """Run both value iterations on ``mdp`` and compare them."""
    kwargs = {"gamma": config.gamma, "alpha": config.alpha, "tol": config.tol, "max_iters": config.max_iters}
    hard = value_iteration("hard", mdp, **kwargs)
    soft = value_iteration("soft", mdp, **kwargs)
    finite = np.isfinite(hard.q)
    soft_below_hard = bool(np.all(soft.q[finite] <= hard.q[finite] + 1e-9))
    comparison = PolicyComparison(
        mdp=mdp,
        start=start,
        hard=hard,
        soft=soft,
        hard_path=greedy_rollout(hard, start),
        soft_path=greedy_rollout(soft, start),
        agreement=argmax_agreement(hard, soft),
        soft_below_hard=soft_below_hard,
    )
    logger.info(
        "policy comparison: agreement=%.3f soft<=hard=%s converged=%s",
        comparison.agreement,
        soft_below_hard,
        comparison.converged,
    )
    return comparison


def run_policy_lab(config: PolicyLabConfig) -> PolicyComparison:
    """Comparison on the bordered empty room with unit costs."""
    mdp, start = bordered_grid_mdp(config.size)
    return compare_policies(mdp, start, config)
