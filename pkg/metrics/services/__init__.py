"""
metrics/services/__init__.py
============================
Service layer for evaluation metrics.

Exports:
    - nll, accuracy, tsr, mhd, modified_hausdorff: Metrics.
    - EpisodeOutcome, MetricSummary: Inputs and outputs of evaluation.
    - HISTORY_COLUMNS, RESULT_COLUMNS, history_frame, results_frame,
      write_history_csv, write_results_csv: CSV export.
    - MetricsError, LengthMismatchError, EmptyTrajectoryError: Custom exceptions.
"""

from .exceptions import EmptyTrajectoryError, LengthMismatchError, MetricsError
from .export import HISTORY_COLUMNS, RESULT_COLUMNS, history_frame, results_frame, write_history_csv, write_results_csv
from .scores import EpisodeOutcome, MetricSummary, accuracy, mhd, modified_hausdorff, nll, tsr

__all__: list[str] = [
    "nll",
    "accuracy",
    "tsr",
    "mhd",
    "modified_hausdorff",
    "EpisodeOutcome",
    "MetricSummary",
    "HISTORY_COLUMNS",
    "RESULT_COLUMNS",
    "history_frame",
    "results_frame",
    "write_history_csv",
    "write_results_csv",
    "MetricsError",
    "LengthMismatchError",
    "EmptyTrajectoryError",
]
