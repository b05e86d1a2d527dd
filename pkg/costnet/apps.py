"""
costnet/apps.py
===============
Django app configuration for the learnable cost encoder.
"""

from django.apps import AppConfig


class CostNetConfig(AppConfig):
    """Configuration for the ``costnet`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "costnet"
    verbose_name = "Cost Encoder"
