"""
WSGI config for the semnav project.

Serves the Django admin over the experiment run registry.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "semnav.settings")

application = get_wsgi_application()
