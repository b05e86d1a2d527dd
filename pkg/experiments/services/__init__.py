"""
experiments/services/__init__.py
================================
Service layer behind the pipeline management commands.

Exports:
    - RunConfig, resolve_run_config, deep_merge, load_config_file: Layered
      run configuration.
    - ExperimentService: Runs a command's pipeline inside a registered run.
    - evaluate_demonstrations, EpisodeReport: Split evaluation.
    - run_benchmark, BENCH_METHODS, TimingRow: Latency benchmark.
    - inspect_episode: Per-step image dumps.
    - ExperimentError, ConfigurationError: Custom exceptions.
"""

from .benchmark import BENCH_METHODS, TIMING_COLUMNS, BenchMethod, TimingRow, run_benchmark, write_timings_csv
from .evaluation import EpisodeReport, evaluate_demonstrations, write_episode_reports
from .exceptions import ConfigurationError, ExperimentError
from .experiment_service import ExperimentService
from .inspection import inspect_episode
from .run_config import FLAG_PATHS, RESOLVED_CONFIG_FILE, RunConfig, deep_merge, load_config_file, resolve_run_config

__all__: list[str] = [
    "FLAG_PATHS",
    "RESOLVED_CONFIG_FILE",
    "RunConfig",
    "deep_merge",
    "load_config_file",
    "resolve_run_config",
    "ExperimentService",
    "EpisodeReport",
    "evaluate_demonstrations",
    "write_episode_reports",
    "BENCH_METHODS",
    "TIMING_COLUMNS",
    "BenchMethod",
    "TimingRow",
    "run_benchmark",
    "write_timings_csv",
    "inspect_episode",
    "ExperimentError",
    "ConfigurationError",
]
