"""
policy_lab/services/export.py
=============================
Q-table CSV and value / policy images of a comparison.

Policy images colour each cell by its most likely control; blocked cells
are black and the goal white.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from gridworld.services.dynamics import CONTROLS
from gridworld.services.rendering import heatmap, upscale, write_ppm

from .comparison import PolicyComparison
from .value_iteration import QTable, extract_policy

logger: logging.Logger = logging.getLogger(__name__)

CONTROL_COLORS: np.ndarray = np.array(
    [(230, 80, 60), (60, 120, 230), (240, 200, 40), (70, 190, 90)],
    dtype=np.uint8,
)


def q_table_frame(comparison: PolicyComparison) -> pd.DataFrame:
    """One row per valid (state, control) with both Q values and policies."""
    mdp = comparison.mdp
    pi_hard, pi_soft = extract_policy(comparison.hard), extract_policy(comparison.soft)
    rows: list[dict] = []
    for index in range(mdp.size):
        state = mdp.state_of(index)
        for u in CONTROLS:
            if not mdp.valid[index, u]:
                continue
            rows.append(
                {
                    "row": state.row,
                    "col": state.col,
                    "control": u.label,
                    "q_hard": comparison.hard.q[index, u],
                    "q_soft": comparison.soft.q[index, u],
                    "pi_hard": pi_hard[index, u],
                    "pi_soft": pi_soft[index, u],
                }
            )
    return pd.DataFrame(rows, columns=["row", "col", "control", "q_hard", "q_soft", "pi_hard", "pi_soft"])


def value_image(table: QTable, scale: int = 8) -> np.ndarray:
    values = table.values()
    values = np.where(table.mdp.blocked, np.nan, values)
    return upscale(heatmap(values, low=(20, 20, 120), high=(250, 250, 160)), scale)


def policy_image(table: QTable, path: list | None = None, scale: int = 8) -> np.ndarray:
    mdp = table.mdp
    best: np.ndarray = np.argmin(table.q, axis=1).reshape(mdp.shape)
    image: np.ndarray = CONTROL_COLORS[best]
    image[mdp.blocked] = (0, 0, 0)
    for state in path or []:
        image[state.row, state.col] = image[state.row, state.col] // 2
    image[mdp.goal.row, mdp.goal.col] = (255, 255, 255)
    return upscale(image, scale)


def write_comparison(comparison: PolicyComparison, out_dir: str | Path) -> dict[str, Path]:
    """Write the four panels, the Q table and the summary row."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {
        "value_hard": write_ppm(out_dir / "value_hard.ppm", value_image(comparison.hard)),
        "value_soft": write_ppm(out_dir / "value_soft.ppm", value_image(comparison.soft)),
        "policy_hard": write_ppm(
            out_dir / "policy_hard.ppm", policy_image(comparison.hard, comparison.hard_path.states)
        ),
        "policy_soft": write_ppm(
            out_dir / "policy_soft.ppm", policy_image(comparison.soft, comparison.soft_path.states)
        ),
    }
    written["q_table"] = out_dir / "q_table.csv"
    q_table_frame(comparison).to_csv(written["q_table"], index=False, float_format="%.17g")
    written["comparison"] = out_dir / "comparison.csv"
    pd.DataFrame([comparison.summary()]).to_csv(written["comparison"], index=False, float_format="%.17g")
    logger.info("wrote policy lab artifacts to %s", out_dir)
    return written
