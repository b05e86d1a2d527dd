"""
experiments/management/base.py
==============================
Shared base of the pipeline management commands.

Adds the common flags, resolves the run configuration and turns domain
errors into ``CommandError`` so the process exits nonzero with the message
on stderr.
"""

from __future__ import annotations

import json
import logging

from django.core.management.base import BaseCommand, CommandError

from experiments.services import ExperimentService, resolve_run_config
from semnav.exceptions import SemNavError

logger: logging.Logger = logging.getLogger(__name__)


class PipelineCommand(BaseCommand):
    """Base class; subclasses set ``title`` and implement :meth:`execute_pipeline`."""

    title: str = ""

    def add_arguments(self, parser) -> None:
        parser.add_argument("--config", help="JSON file merged over the default configuration.")
        parser.add_argument("--seed", type=int, help="Run seed.")
        parser.add_argument("--out", help="Output directory.")
        parser.add_argument("--grid-size", type=int, dest="grid_size", help="Grid side length.")
        parser.add_argument("--episodes", type=int, help="Cap on the episodes per split.")
        parser.add_argument("--epochs", type=int, help="Training epochs.")
        parser.add_argument("--alpha", type=float, help="Policy temperature.")
        parser.add_argument("--lr", type=float, help="Adam learning rate.")
        parser.add_argument("--checkpoint", help="Checkpoint to evaluate, benchmark or inspect.")
        parser.add_argument("--progress", action="store_true", help="Show progress bars.")

    def execute_pipeline(self, service: ExperimentService) -> dict:
        raise NotImplementedError

    def report(self, summary: dict) -> None:
        self.stdout.write(json.dumps(summary, indent=2, sort_keys=True, default=str))

    def handle(self, *args, **options):
        command: str = self.__module__.rsplit(".", 1)[-1]
        self.stdout.write(self.style.MIGRATE_HEADING(f"\n=== {self.title} ===\n"))
        overrides = {
            key: options.get(key)
            for key in ("seed", "out", "grid_size", "episodes", "epochs", "alpha", "lr", "checkpoint")
        }
        try:
            config = resolve_run_config(command, options.get("config"), overrides)
            service = ExperimentService(config, progress=options.get("progress", False))
            summary = service.run(lambda: self.execute_pipeline(service))
        except SemNavError as exc:
            raise CommandError(f"{command} failed: {exc.message}") from exc
        except Exception as exc:
            logger.exception("unexpected error in %s", command)
            raise CommandError(f"{command} failed: {exc}") from exc
        self.report(summary)
        self.stdout.write(self.style.SUCCESS(f"\n{self.title} finished, artifacts in {config.out}"))
