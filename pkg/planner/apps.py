"""
planner/apps.py
===============
Django app configuration for the shortest-path planner.
"""

from django.apps import AppConfig


class PlannerConfig(AppConfig):
    """Configuration for the ``planner`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "planner"
    verbose_name = "Planner"
