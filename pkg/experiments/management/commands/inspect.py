"""
experiments/management/commands/inspect.py
==========================================
Dump posterior, cost, subgradient and rollout images of one stored episode.

Usage:
    python manage.py inspect --config cfg.json --out runs/inspect
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Dump posterior, cost, subgradient and rollout images of one stored episode."
    title = "Inspecting Episode"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.inspect()
