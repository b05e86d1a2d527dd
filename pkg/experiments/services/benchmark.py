"""
experiments/services/benchmark.py
=================================
Per-step latency of control prediction.

One step is the full online loop: fold the scan into the map, compute the
cost field and plan. The agent follows the predicted controls and is reset
to the start whenever it reaches the goal or gets stuck, so every method
is timed for the same number of steps on the same environment.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from gridworld.services import AgentState, Control, GridParams, SemanticGrid, generate_environment, step
from gridworld.services.episodes import sample_start_goal
from learner.services import CostStrategy, plan_step
from planner.services import greedy_control
from sensor.services import SensorParams, scan

from .exceptions import ExperimentError

logger: logging.Logger = logging.getLogger(__name__)

TIMING_COLUMNS: list[str] = ["grid_size", "method", "mean_ms", "std_ms", "steps", "repeats"]


@dataclass(frozen=True)
class BenchMethod:
    """A planner setting timed by the benchmark."""

    name: str
    planner: str
    eps_weight: float = 1.0


BENCH_METHODS: tuple[BenchMethod, ...] = (
    BenchMethod("astar", "astar"),
    BenchMethod("weighted_astar", "astar", eps_weight=2.0),
    BenchMethod("maxent_vi", "maxent"),
)


@dataclass(frozen=True)
class TimingRow:
    grid_size: int
    method: str
    mean_ms: float
    std_ms: float
    steps: int
    repeats: int

    def to_dict(self) -> dict:
        return asdict(self)


def bench_scene(size: int, seed: int, grid_params: GridParams) -> tuple[SemanticGrid, AgentState, AgentState]:
    """Environment and start/goal pair timed at ``size``; later seeds are tried if one has no pair."""
    params = replace(grid_params, width=size, height=size)
    for offset in range(100):
        grid = generate_environment(seed + offset, params)
        pair = sample_start_goal(grid, np.random.default_rng([seed + offset, 1]))
        if pair is not None:
            return grid, pair[0], pair[1]
    raise ExperimentError(message=f"no start/goal pair found for a {size}x{size} benchmark grid", details={})


def time_steps(
    grid: SemanticGrid,
    start: AgentState,
    goal: AgentState,
    strategy: CostStrategy,
    method: BenchMethod,
    steps: int,
    sensor_params: SensorParams,
    alpha: float = 1.0,
) -> np.ndarray:
    """Milliseconds spent on each of ``steps`` control predictions."""
    blocked = strategy.blocked(grid)
    log_map = strategy.new_map(grid.shape)
    x: AgentState = start
    timings: np.ndarray = np.empty(steps)
    for i in range(steps):
        cloud = scan(grid, x, sensor_params)
        began: float = time.perf_counter()
        log_map = strategy.observe(log_map, x, cloud)
        _, cost_field = strategy.cost_field(log_map, grid)
        step_plan = plan_step(cost_field.values, x, goal, alpha, method.planner, blocked, eps_weight=method.eps_weight)
        timings[i] = (time.perf_counter() - began) * 1000.0
        cost_field.release()

        nxt = step(grid, x, Control(greedy_control(step_plan.policy))) if step_plan.reachable else x
        if nxt == goal or nxt == x:
            log_map = strategy.new_map(grid.shape)
            nxt = start
        x = nxt
    return timings


def run_benchmark(
    strategy: CostStrategy,
    sizes: list[int],
    steps: int,
    repeats: int,
    seed: int,
    grid_params: GridParams,
    sensor_params: SensorParams,
    alpha: float = 1.0,
    methods: tuple[BenchMethod, ...] = BENCH_METHODS,
) -> list[TimingRow]:
    """Time every method on every grid size.

    ``mean_ms`` is the mean over all timed steps; ``std_ms`` is the spread
    of the per-repeat means (zero for a single repeat).
    """
    if steps < 1 or repeats < 1:
        raise ExperimentError(message="bench needs at least one step and one repeat", details={"steps": steps})
    rows: list[TimingRow] = []
    for size in sizes:
        grid, start, goal = bench_scene(int(size), seed, grid_params)
        for method in methods:
            runs = [
                time_steps(grid, start, goal, strategy, method, steps, sensor_params, alpha) for _ in range(repeats)
            ]
            means = np.array([r.mean() for r in runs])
            row = TimingRow(
                grid_size=int(size),
                method=method.name,
                mean_ms=float(np.concatenate(runs).mean()),
                std_ms=float(means.std(ddof=1)) if repeats > 1 else 0.0,
                steps=steps,
                repeats=repeats,
            )
            logger.info("bench %dx%d %s: %.3f ms/step (std %.3f)", size, size, method.name, row.mean_ms, row.std_ms)
            rows.append(row)
    return rows


def write_timings_csv(path: str | Path, rows: list[TimingRow]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([r.to_dict() for r in rows], columns=TIMING_COLUMNS).to_csv(path, index=False)
    return path
