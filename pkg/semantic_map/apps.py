"""
semantic_map/apps.py
====================
Django app configuration for the Bayesian semantic map encoder.
"""

from django.apps import AppConfig


class SemanticMapConfig(AppConfig):
    """Configuration for the ``semantic_map`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "semantic_map"
    verbose_name = "Semantic Map"
