"""
URL configuration for the semnav project.

Routes:
    /admin/     → Django Admin (experiment run registry)
"""

from django.contrib import admin
from django.urls import path

urlpatterns = [
    path("admin/", admin.site.urls),
]
