"""
metrics/apps.py
===============
Django app configuration for evaluation metrics.
"""

from django.apps import AppConfig


class MetricsConfig(AppConfig):
    """Configuration for the ``metrics`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "metrics"
    verbose_name = "Evaluation Metrics"
