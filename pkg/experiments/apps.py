"""
experiments/apps.py
===================
Django app configuration for the command-line pipeline and its run registry.
"""

from django.apps import AppConfig


class ExperimentsConfig(AppConfig):
    """Configuration for the ``experiments`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "experiments"
    verbose_name = "Experiments"
