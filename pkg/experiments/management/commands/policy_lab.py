"""
experiments/management/commands/policy_lab.py
=============================================
Compare hard-min and soft-min value iteration on a bordered room.

Usage:
    python manage.py policy_lab --config cfg.json --out runs/policy_lab
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Compare hard-min and soft-min value iteration on a bordered room."
    title = "Comparing Value Iterations"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.policy_lab()

    def report(self, summary: dict) -> None:
        super().report(summary)
        if not (summary["hard_converged"] and summary["soft_converged"]):
            self.stdout.write(self.style.WARNING("\nvalue iteration did not converge"))
