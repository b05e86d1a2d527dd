"""
metrics/services/scores.py
==========================
Imitation and navigation metrics.

* ``nll``: mean negative log-likelihood of the demonstrated controls over all
  steps of all episodes.
* ``accuracy``: fraction of steps whose most likely control is the
  demonstrated one (ties go to the earliest control).
* ``tsr``: fraction of rollouts reaching the goal within twice the expert's
  step count, bound included.
* ``mhd``: modified Hausdorff distance between agent and expert paths,
  averaged over episodes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import EmptyTrajectoryError, LengthMismatchError

logger: logging.Logger = logging.getLogger(__name__)

Trajectory = Sequence[tuple[int, int]]


def _check_aligned(policies: Sequence[np.ndarray], controls: Sequence[int]) -> None:
    if len(policies) != len(controls):
        raise LengthMismatchError("policies and demonstrated controls", len(policies), len(controls))


def nll(policies: Sequence[np.ndarray], controls: Sequence[int], clamp: float | None = None) -> float:
    """Mean of ``-log pi(u*)`` over all steps.

    Args:
        policies: One probability vector over the controls per step.
        controls: Demonstrated control per step.
        clamp: Upper bound on a single step's loss; ``None`` lets a zero
            probability give ``inf``.

    Raises:
        LengthMismatchError: If the sequences differ in length.
    """
    _check_aligned(policies, controls)
    if not policies:
        return math.nan
    probabilities = np.array([float(p[int(u)]) for p, u in zip(policies, controls)])
    with np.errstate(divide="ignore"):
        losses: np.ndarray = -np.log(probabilities)
    if clamp is not None:
        losses = np.minimum(losses, clamp)
    return float(losses.mean())


def accuracy(policies: Sequence[np.ndarray], controls: Sequence[int]) -> float:
    """Fraction of steps where ``argmax pi`` is the demonstrated control.

    Raises:
        LengthMismatchError: If the sequences differ in length.
    """
    _check_aligned(policies, controls)
    if not policies:
        return math.nan
    hits = sum(int(np.argmax(p)) == int(u) for p, u in zip(policies, controls))
    return hits / len(policies)


@dataclass(frozen=True)
class EpisodeOutcome:
    """Closed-loop result of one test episode.

    Attributes:
        reached: Whether the agent stood on the goal at the end.
        steps: Controls the agent applied.
        expert_steps: Length of the expert demonstration.
    """

    reached: bool
    steps: int
    expert_steps: int

    @property
    def succeeded(self) -> bool:
        return self.reached and self.steps <= 2 * self.expert_steps


def tsr(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Trajectory success rate; ``nan`` for no episodes."""
    if not outcomes:
        return math.nan
    return sum(o.succeeded for o in outcomes) / len(outcomes)


def modified_hausdorff(agent: Trajectory, expert: Trajectory) -> float:
    """Larger of the two directed mean closest-point distances between cell centres.

    Raises:
        EmptyTrajectoryError: If either trajectory has no states.
    """
    if len(agent) == 0:
        raise EmptyTrajectoryError("agent")
    if len(expert) == 0:
        raise EmptyTrajectoryError("expert")
    distances: np.ndarray = cdist(np.asarray(agent, dtype=np.float64), np.asarray(expert, dtype=np.float64))
    return float(max(distances.min(axis=1).mean(), distances.min(axis=0).mean()))


def mhd(agent_trajectories: Sequence[Trajectory], expert_trajectories: Sequence[Trajectory]) -> float:
    """Mean modified Hausdorff distance over paired trajectories.

    Raises:
        LengthMismatchError: If the two lists differ in length.
        EmptyTrajectoryError: If any trajectory is empty.
    """
    if len(agent_trajectories) != len(expert_trajectories):
        raise LengthMismatchError("agent and expert trajectories", len(agent_trajectories), len(expert_trajectories))
    if not agent_trajectories:
        return math.nan
    return float(np.mean([modified_hausdorff(a, e) for a, e in zip(agent_trajectories, expert_trajectories)]))


@dataclass(frozen=True)
class MetricSummary:
    """One row of a results table."""

    split: str
    nll: float
    accuracy: float
    tsr: float
    mhd: float
    episodes: int
    steps: int

    def to_dict(self) -> dict:
        return asdict(self)
