"""
Django settings for the slicesched eNodeB virtualization simulator.

There is no web surface: the project exists for its management commands
(simulate, figure, assign, export_layout, list_runs) and the run ledger.
"""
import importlib.util
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent


def _env_bool(name, default):
    return os.environ.get(name, str(default)).lower() in ("true", "1", "yes")


SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY", "insecure-dev-key-change-me")
DEBUG = _env_bool("DJANGO_DEBUG", False)
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "domain",
    "channel",
    "schedulers",
    "metrics",
    "sim",
    "experiments",
    "runlog",
]

# ---------------------------------------------------------------------------
# Database: only the run ledger lives here
# ---------------------------------------------------------------------------
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": os.environ.get("SLICE_SCHED_DB", str(BASE_DIR / "slicesched.sqlite3")),
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

TIME_ZONE = "UTC"
USE_TZ = True

# ---------------------------------------------------------------------------
# Simulation runtime
# ---------------------------------------------------------------------------
SLICE_SCHED_THREADS = int(os.environ.get("SLICE_SCHED_THREADS", os.cpu_count() or 1))
RESULTS_DIR = os.environ.get("SLICE_SCHED_OUT_DIR", "results")

# Preset scale: 200 x 1000 keeps a full figure run within desk-scale minutes.
PRESET_RUNS = int(os.environ.get("SLICE_SCHED_PRESET_RUNS", 200))
PRESET_SLOTS = int(os.environ.get("SLICE_SCHED_PRESET_SLOTS", 1000))

# ---------------------------------------------------------------------------
# Plotting (optional)
# ---------------------------------------------------------------------------
PLOTTING_ENABLED = _env_bool(
    "SLICE_SCHED_PLOTTING", importlib.util.find_spec("matplotlib") is not None
)

# ---------------------------------------------------------------------------
# Run ledger
# ---------------------------------------------------------------------------
RUN_LEDGER_ENABLED = _env_bool("SLICE_SCHED_RUN_LEDGER", True)

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "django": {"handlers": ["console"], "level": "WARNING", "propagate": False},
        "slicesched": {
            "handlers": ["console"],
            "level": os.environ.get("SLICE_SCHED_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
