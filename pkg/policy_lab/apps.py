"""
policy_lab/apps.py
==================
Django app configuration for the value iteration laboratory.
"""

from django.apps import AppConfig


class PolicyLabConfig(AppConfig):
    """Configuration for the ``policy_lab`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "policy_lab"
    verbose_name = "Policy Lab"
