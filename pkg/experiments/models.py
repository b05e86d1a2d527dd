"""
experiments/models.py
=====================
Run registry for the pipeline commands.

Contains:
    - ExperimentRunModel: One invocation of a management command, with its
      resolved configuration, status and summary.
    - EpochMetricModel: Per-epoch NLL and accuracy of a training run.
"""

from __future__ import annotations

from django.db import models


class ExperimentRunModel(models.Model):
    """Records one command invocation.

    Attributes:
        command: Management command name (``gen_data``, ``train``, ...).
        seed: Run seed.
        output_dir: Directory the artifacts were written to.
        config: Fully resolved run configuration.
        status: ``RUNNING``, ``COMPLETED`` or ``FAILED``.
        summary: Command-specific results (counts, metrics, paths).
        error_message: Failure description for ``FAILED`` runs.
        started_at: Creation timestamp.
        finished_at: Completion timestamp, empty while running.
    """

    class Status(models.TextChoices):
        RUNNING = "RUNNING", "Running"
        COMPLETED = "COMPLETED", "Completed"
        FAILED = "FAILED", "Failed"

    # ------------------------------------------------------------------
    # Fields
    # ------------------------------------------------------------------
    command: str = models.CharField(
        max_length=32,
        help_text="Management command that produced this run.",
    )
    seed = models.IntegerField(
        default=0,
        help_text="Seed of the run.",
    )
    output_dir: str = models.CharField(
        max_length=500,
        help_text="Directory holding the run's artifacts.",
    )
    config = models.JSONField(
        default=dict,
        help_text="Resolved run configuration, as written to resolved_config.json.",
    )
    status: str = models.CharField(
        max_length=16,
        choices=Status.choices,
        default=Status.RUNNING,
    )
    summary = models.JSONField(
        default=dict,
        help_text="Command-specific results, e.g. episode counts or metrics.",
    )
    error_message: str = models.TextField(
        blank=True,
        default="",
    )
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    # ------------------------------------------------------------------
    # Meta
    # ------------------------------------------------------------------
    class Meta:
        ordering: list[str] = ["-started_at"]
        verbose_name: str = "Experiment Run"
        verbose_name_plural: str = "Experiment Runs"

    def __str__(self) -> str:
        return f"{self.command} seed={self.seed} [{self.status}]"


class EpochMetricModel(models.Model):
    """NLL and accuracy of one split after one training epoch."""

    run = models.ForeignKey(
        ExperimentRunModel,
        on_delete=models.CASCADE,
        related_name="epoch_metrics",
    )
    epoch = models.PositiveIntegerField()
    split: str = models.CharField(max_length=16)
    nll = models.FloatField(null=True, blank=True)
    accuracy = models.FloatField(null=True, blank=True)

    class Meta:
        ordering: list[str] = ["run", "epoch", "split"]
        unique_together = [("run", "epoch", "split")]
        verbose_name: str = "Epoch Metric"
        verbose_name_plural: str = "Epoch Metrics"

    def __str__(self) -> str:
        return f"run {self.run_id} epoch {self.epoch} {self.split}: nll={self.nll}"
