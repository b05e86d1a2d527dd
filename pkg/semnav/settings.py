"""
Django settings for the semnav project.

Configured with django-environ for environment variable management.
The ``SEMNAV_DEFAULTS`` block is the base layer of every run
configuration resolved by the ``experiments`` management commands.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path

import environ

# =============================================================================
# Path Configuration
# =============================================================================
BASE_DIR: Path = Path(__file__).resolve().parent.parent

# =============================================================================
# Environment Variables (django-environ)
# =============================================================================
env = environ.Env(
    SECRET_KEY=(str, "semnav-dev-insecure-key"),
    DEBUG=(bool, False),
    ALLOWED_HOSTS=(list, ["localhost", "127.0.0.1"]),
    SEMNAV_OUTPUT_DIR=(str, "runs"),
    SEMNAV_SEED=(int, 0),
    SEMNAV_LOG_LEVEL=(str, "INFO"),
    SEMNAV_DATABASE_PATH=(str, "db.sqlite3"),
)
environ.Env.read_env(BASE_DIR / ".env")

# =============================================================================
# Core Settings
# =============================================================================
SECRET_KEY: str = env("SECRET_KEY")
DEBUG: bool = env("DEBUG")
ALLOWED_HOSTS: list[str] = env("ALLOWED_HOSTS")

# =============================================================================
# Application Definition
# =============================================================================
INSTALLED_APPS: list[str] = [
    # Django built-in apps
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    # Third-party apps
    "django_extensions",
    # Project apps
    "gridworld.apps.GridWorldConfig",
    "sensor.apps.SensorConfig",
    "semantic_map.apps.SemanticMapConfig",
    "costnet.apps.CostNetConfig",
    "planner.apps.PlannerConfig",
    "learner.apps.LearnerConfig",
    "metrics.apps.MetricsConfig",
    "policy_lab.apps.PolicyLabConfig",
    "experiments.apps.ExperimentsConfig",
]

MIDDLEWARE: list[str] = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF: str = "semnav.urls"

TEMPLATES: list[dict] = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION: str = "semnav.wsgi.application"

# =============================================================================
# Database – SQLite run registry
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases
# =============================================================================
DATABASES: dict = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / env("SEMNAV_DATABASE_PATH"),
    }
}

# =============================================================================
# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/
# =============================================================================
LANGUAGE_CODE: str = "en-us"
TIME_ZONE: str = "UTC"
USE_I18N: bool = True
USE_TZ: bool = True

# =============================================================================
# Static Files (admin only)
# https://docs.djangoproject.com/en/5.2/howto/static-files/
# =============================================================================
STATIC_URL: str = "static/"

# =============================================================================
# Default Primary Key Field Type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field
# =============================================================================
DEFAULT_AUTO_FIELD: str = "django.db.models.BigAutoField"

# =============================================================================
# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/
# =============================================================================
SEMNAV_LOG_LEVEL: str = env("SEMNAV_LOG_LEVEL").upper()

LOGGING: dict = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "console",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": SEMNAV_LOG_LEVEL,
            "propagate": False,
        }
        for app in (
            "gridworld",
            "sensor",
            "semantic_map",
            "costnet",
            "planner",
            "learner",
            "metrics",
            "policy_lab",
            "experiments",
        )
    },
}

# =============================================================================
# Navigation pipeline defaults (base layer of every RunConfig)
# =============================================================================
SEMNAV_DEFAULTS: dict = {
    "seed": env("SEMNAV_SEED"),
    "out": env("SEMNAV_OUTPUT_DIR"),
    "grid": {
        "size": 16,
        "rect_count": [2, 6],
        "rect_size": [2, 6],
        # sampling weights over the non-free classes (wall, lava, lawn)
        "class_weights": [1.0, 1.0, 1.0],
    },
    "data": {
        "dir": "data",
        "train": 500,
        "val": 100,
        "test": 100,
        "episodes": None,
    },
    "sensor": {
        "ray_count": 72,
        "angular_resolution": 5.0,
        "max_range": 3.0,
    },
    "map": {
        "epsilon": 0.5,
        "update_mode": "ray",
        "psi_init": 1.0,
    },
    "model": {
        "encoder": "fcn",
        "channels": [32, 64],
        "output_bias": 1.0,
    },
    "train": {
        "alpha": 1.0,
        "lr": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps_adam": 1e-8,
        "epochs": 30,
        "batch_size": 8,
        "checkpoint_every": 1,
        "loss_clamp": 50.0,
        "resume": None,
    },
    "eval": {
        "checkpoint": None,
        "oracle": False,
        "planner": "astar",
    },
    "bench": {
        "sizes": [16, 64],
        "steps": 100,
        "repeats": 3,
    },
    "inspect": {
        "episode": 0,
        "split": "test",
        "steps": [0],
    },
    "policy_lab": {
        "size": 16,
        "gamma": 0.95,
        "alpha": 1.0,
        "tol": 1e-8,
        "max_iters": 10000,
    },
}
