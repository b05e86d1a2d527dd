"""
sensor/apps.py
==============
Django app configuration for the simulated range sensor.
"""

from django.apps import AppConfig


class SensorConfig(AppConfig):
    """Configuration for the ``sensor`` application."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "sensor"
    verbose_name = "Semantic Lidar"
