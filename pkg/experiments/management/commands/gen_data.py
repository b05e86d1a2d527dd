"""
experiments/management/commands/gen_data.py
===========================================
Generate expert demonstrations for the train, val and test splits.

Usage:
    python manage.py gen_data --config cfg.json --out runs/gen_data
"""

from experiments.management.base import PipelineCommand
from experiments.services import ExperimentService


class Command(PipelineCommand):
    help = "Generate expert demonstrations for the train, val and test splits."
    title = "Generating Datasets"

    def execute_pipeline(self, service: ExperimentService) -> dict:
        return service.generate_data()

    def report(self, summary: dict) -> None:
        for split, count in summary["counts"].items():
            self.stdout.write(f"  [{split}] {count} demonstrations -> {summary['paths'][split]}")
