"""
experiments/services/inspection.py
==================================
Image and table dumps of what the model sees and plans along one episode.

Layout under the output directory::

    prior/class_<k>.ppm             posterior of the empty map
    step_<t>/class_<k>.ppm          per-class posterior after the scan at t
    step_<t>/argmax.ppm             most likely class, unobserved cells black
    step_<t>/cost.ppm               cost field, low dark to high bright
    step_<t>/subgradient_<u>.ppm    cells on the optimal path that starts with u
    step_<t>/search_trace.json      expansion order and g-values
    step_<t>/map_snapshot.csv       stored log-odds
    point_counts.ppm                hit counts of the scans up to the last step
    rollout.ppm                     true map with the closed-loop path
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from gridworld.services import CONTROLS, ClassSet
from gridworld.services.expert import Demonstration
from gridworld.services.rendering import class_image, heatmap, overlay_cells, upscale, write_ppm
from learner.services import CostStrategy, plan_step, rollout
from planner.services import SearchTrace, subgradient
from semantic_map.services.export import (
    class_posterior_images,
    point_counts,
    write_argmax_ppm,
    write_map_snapshot,
)
from sensor.services import SensorParams

from .exceptions import ExperimentError

logger: logging.Logger = logging.getLogger(__name__)

SUBGRADIENT_COLOR: tuple[int, int, int] = (255, 255, 0)


def _write_posteriors(log_map, directory: Path, scale: int) -> list[Path]:
    return [
        write_ppm(directory / f"class_{k}.ppm", image)
        for k, image in enumerate(class_posterior_images(log_map, scale))
    ]


def inspect_episode(
    demonstration: Demonstration,
    strategy: CostStrategy,
    steps: list[int],
    out_dir: str | Path,
    class_set: ClassSet,
    sensor_params: SensorParams,
    alpha: float = 1.0,
    scale: int = 8,
) -> dict[str, Path]:
    """Replay ``demonstration`` and dump the images of the requested steps.

    Args:
        demonstration: Episode to replay along the expert's states.
        strategy: Map encoder and cost source.
        steps: Step indices to dump; each must be below the episode length.
        out_dir: Destination directory.
        class_set: Palette of the class images.
        sensor_params: Lidar layout of the closed-loop rollout.
        alpha: Policy temperature.
        scale: Pixels per cell.

    Returns:
        Written paths by name.

    Raises:
        ExperimentError: On a step index outside the episode.
    """
    out_dir = Path(out_dir)
    wanted: set[int] = set(int(t) for t in steps)
    bad = sorted(t for t in wanted if not 0 <= t < demonstration.length)
    if bad:
        raise ExperimentError(
            message=f"steps {bad} are outside the episode of length {demonstration.length}",
            details={"steps": bad, "length": demonstration.length},
        )

    grid = demonstration.grid
    blocked = strategy.blocked(grid)
    written: dict[str, Path] = {}
    log_map = strategy.new_map(grid.shape)
    for k, path in enumerate(_write_posteriors(log_map, out_dir / "prior", scale)):
        written[f"prior/class_{k}"] = path

    last: int = max(wanted, default=-1)
    for t, recorded in enumerate(demonstration.steps[: last + 1]):
        log_map = strategy.observe(log_map, recorded.state, recorded.scan)
        if t not in wanted:
            continue
        directory = out_dir / f"step_{t}"
        for k, path in enumerate(_write_posteriors(log_map, directory, scale)):
            written[f"step_{t}/class_{k}"] = path
        written[f"step_{t}/argmax"] = write_argmax_ppm(log_map, class_set, directory / "argmax.ppm", scale)
        written[f"step_{t}/map_snapshot"] = write_map_snapshot(log_map, directory / "map_snapshot.csv")

        _, cost_field = strategy.cost_field(log_map, grid)
        costs: np.ndarray = cost_field.values
        written[f"step_{t}/cost"] = write_ppm(directory / "cost.ppm", upscale(heatmap(costs), scale))

        trace = SearchTrace()
        step_plan = plan_step(costs, recorded.state, demonstration.goal, alpha, "astar", blocked, trace=trace)
        cost_field.release()
        trace_path = directory / "search_trace.json"
        trace_path.write_text(json.dumps(trace.to_dict()) + "\n", encoding="utf-8")
        written[f"step_{t}/search_trace"] = trace_path

        base: np.ndarray = heatmap(costs)
        for u in CONTROLS:
            cells: list = []
            if np.isfinite(step_plan.q[u]):
                cells = list(subgradient(step_plan.result, recorded.state, u).arrival_counts())
            image = overlay_cells(base, cells, SUBGRADIENT_COLOR)
            written[f"step_{t}/subgradient_{u.label}"] = write_ppm(
                directory / f"subgradient_{u.label}.ppm", upscale(image, scale)
            )
        logger.debug("inspected step %d at %s", t, tuple(recorded.state))

    if last >= 0:
        counts = point_counts((s.scan for s in demonstration.steps[: last + 1]), grid.shape)
        written["point_counts"] = write_ppm(out_dir / "point_counts.ppm", upscale(heatmap(counts), scale))

    result = rollout(
        grid, demonstration.start, demonstration.goal, strategy, 2 * demonstration.length, sensor_params, alpha
    )
    path_image = overlay_cells(class_image(grid.cells, class_set), result.states)
    written["rollout"] = write_ppm(out_dir / "rollout.ppm", upscale(path_image, scale))
    logger.info("inspection of %d steps written to %s (rollout %s)", len(wanted), out_dir, result.reason)
    return written
