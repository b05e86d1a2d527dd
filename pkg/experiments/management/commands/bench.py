"""
experiments/management/commands/bench.py
========================================
Time per-step control prediction for each planner and grid size.

Usage:
    python manage.py bench --config cfg.json --out runs/bench
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Time per-step control prediction for each planner and grid size."
    title = "Benchmarking Inference Speed"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.bench()
