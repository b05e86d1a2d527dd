"""
learner/apps.py
===============
Django app configuration for end-to-end training and closed-loop rollouts.
"""

from django.apps import AppConfig


class LearnerConfig(AppConfig):
    """Configuration for the ``learner`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "learner"
    verbose_name = "Learner"
