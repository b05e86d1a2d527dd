"""
gridworld/apps.py
=================
Django app configuration for the procedural grid environments.
"""

from django.apps import AppConfig


class GridWorldConfig(AppConfig):
    """Configuration for the ``gridworld`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "gridworld"
    verbose_name = "Grid World"
