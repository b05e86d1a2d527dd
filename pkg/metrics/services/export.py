"""
metrics/services/export.py
==========================
CSV tables of training histories and evaluation results.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from pathlib import Path

import pandas as pd

from .scores import MetricSummary

logger: logging.Logger = logging.getLogger(__name__)

HISTORY_COLUMNS: list[str] = ["epoch", "split", "nll", "accuracy"]
RESULT_COLUMNS: list[str] = ["split", "nll", "accuracy", "tsr", "mhd", "episodes", "steps"]


def history_frame(history: Iterable[Mapping]) -> pd.DataFrame:
    """Per-epoch metrics, one row per (epoch, split)."""
    return pd.DataFrame([{c: row[c] for c in HISTORY_COLUMNS} for row in history], columns=HISTORY_COLUMNS)


def results_frame(summaries: Iterable[MetricSummary]) -> pd.DataFrame:
    return pd.DataFrame([s.to_dict() for s in summaries], columns=RESULT_COLUMNS)


def write_history_csv(path: str | Path, history: Iterable[Mapping]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    history_frame(history).to_csv(path, index=False, float_format="%.17g")
    logger.debug("wrote metrics history to %s", path)
    return path


def write_results_csv(path: str | Path, summaries: Iterable[MetricSummary]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(summaries).to_csv(path, index=False, float_format="%.17g")
    logger.info("wrote results table to %s", path)
    return path
