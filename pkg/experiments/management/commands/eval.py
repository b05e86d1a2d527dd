"""
experiments/management/commands/eval.py
=======================================
Compute NLL, accuracy, success rate and trajectory distance on the val and test splits.

Usage:
    python manage.py eval --config cfg.json --out runs/eval
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Compute NLL, accuracy, success rate and trajectory distance on the val and test splits."
    title = "Evaluating"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.evaluate()
