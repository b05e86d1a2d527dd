"""
experiments/services/evaluation.py
==================================
Open- and closed-loop evaluation of a cost strategy on stored splits.

NLL and accuracy are measured along the expert's states (the agent sees
the expert's scans). Success rate and trajectory distance come from
closed-loop rollouts capped at twice the expert's length.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from gridworld.services.expert import Demonstration
from learner.services import CostStrategy, RolloutResult, record_episode, rollout
from metrics.services import EpisodeOutcome, MetricSummary, accuracy, mhd, modified_hausdorff, nll, tsr
from sensor.services import SensorParams

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpisodeReport:
    """Per-episode line of ``episodes.json``."""

    split: str
    index: int
    grid_seed: int | None
    start: list[int]
    goal: list[int]
    expert_steps: int
    agent_steps: int
    reached: bool
    succeeded: bool
    reason: str
    nll: float
    accuracy: float
    mhd: float

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_demonstrations(
    split: str,
    demonstrations: Sequence[Demonstration],
    strategy: CostStrategy,
    sensor_params: SensorParams,
    alpha: float = 1.0,
    planner: str = "astar",
    loss_clamp: float | None = 50.0,
    progress: bool = False,
) -> tuple[MetricSummary, list[EpisodeReport]]:
    """Score ``strategy`` on one split.

    Args:
        split: Split name for the report rows.
        demonstrations: Expert episodes.
        strategy: Cost source (learned or oracle).
        sensor_params: Lidar layout of the rollouts.
        alpha: Policy temperature.
        planner: ``"astar"`` or ``"maxent"``.
        loss_clamp: Cap on one step's NLL.
        progress: Show a progress bar.

    Returns:
        The split summary and one report per episode.
    """
    policies: list[np.ndarray] = []
    controls: list[int] = []
    outcomes: list[EpisodeOutcome] = []
    agent_paths: list[list] = []
    expert_paths: list[list] = []
    reports: list[EpisodeReport] = []

    for index, demo in enumerate(tqdm(demonstrations, desc=f"eval {split}", disable=not progress)):
        tape = record_episode(demo, strategy, alpha, loss_clamp, planner=planner, keep_caches=False)
        episode_policies, episode_controls = tape.policies(), tape.controls()
        policies.extend(episode_policies)
        controls.extend(episode_controls)

        result: RolloutResult = rollout(
            demo.grid, demo.start, demo.goal, strategy, 2 * demo.length, sensor_params, alpha, planner
        )
        outcome = EpisodeOutcome(reached=result.reached, steps=result.steps, expert_steps=demo.length)
        outcomes.append(outcome)
        agent_paths.append(result.states)
        expert_paths.append(demo.states())
        reports.append(
            EpisodeReport(
                split=split,
                index=index,
                grid_seed=demo.grid_seed,
                start=list(demo.start),
                goal=list(demo.goal),
                expert_steps=demo.length,
                agent_steps=result.steps,
                reached=result.reached,
                succeeded=outcome.succeeded,
                reason=result.reason,
                nll=nll(episode_policies, episode_controls, clamp=loss_clamp),
                accuracy=accuracy(episode_policies, episode_controls),
                mhd=modified_hausdorff(result.states, demo.states()),
            )
        )

    summary = MetricSummary(
        split=split,
        nll=nll(policies, controls, clamp=loss_clamp),
        accuracy=accuracy(policies, controls),
        tsr=tsr(outcomes),
        mhd=mhd(agent_paths, expert_paths),
        episodes=len(demonstrations),
        steps=len(controls),
    )
    logger.info(
        "%s: nll=%.4f acc=%.3f tsr=%.3f mhd=%.3f over %d episodes",
        split,
        summary.nll,
        summary.accuracy,
        summary.tsr,
        summary.mhd,
        summary.episodes,
    )
    return summary, reports


def write_episode_reports(path: str | Path, reports: Sequence[EpisodeReport]) -> Path:
    """Write ``episodes.json``; ``nan`` is stored as ``null``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in r.to_dict().items()}
        for r in reports
    ]
    path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    return path
