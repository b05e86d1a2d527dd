"""
experiments/management/commands/train.py
========================================
Train the cost encoder and map encoder end to end on stored demonstrations.

Usage:
    python manage.py train --config cfg.json --out runs/train
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Train the cost encoder and map encoder end to end on stored demonstrations."
    title = "Training Cost Model"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.train()

    def report(self, summary: dict) -> None:
        if summary["best_epoch"] is None:
            self.stdout.write(self.style.WARNING("  no epochs run, saved the initial parameters"))
        else:
            self.stdout.write(f"  best epoch {summary['best_epoch']} with nll {summary['best_nll']:.4f}")
        for name, path in summary["checkpoints"].items():
            self.stdout.write(f"  checkpoint {name}: {path}")
