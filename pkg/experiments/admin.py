"""
experiments/admin.py
====================
Django admin configuration for the run registry.
"""

from django.contrib import admin

from .models import EpochMetricModel, ExperimentRunModel


class EpochMetricInline(admin.TabularInline):
    model = EpochMetricModel
    extra: int = 0
    readonly_fields: list[str] = ["epoch", "split", "nll", "accuracy"]


@admin.register(ExperimentRunModel)
class ExperimentRunModelAdmin(admin.ModelAdmin):
    """Admin view for :class:`ExperimentRunModel`."""

    list_display: list[str] = ["command", "seed", "status", "output_dir", "started_at", "finished_at"]
    list_filter: list[str] = ["command", "status", "started_at"]
    search_fields: list[str] = ["output_dir", "error_message"]
    readonly_fields: list[str] = ["started_at", "finished_at"]
    inlines = [EpochMetricInline]
    list_per_page: int = 25


@admin.register(EpochMetricModel)
class EpochMetricModelAdmin(admin.ModelAdmin):
    """Admin view for :class:`EpochMetricModel`."""

    list_display: list[str] = ["run", "epoch", "split", "nll", "accuracy"]
    list_filter: list[str] = ["split"]
