"""
Django settings for forge.

forge has no database, no URL configuration and no templates: Django
provides configuration, logging and the management-command front end.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/dev/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent

SECRET_KEY = os.getenv("SECRET_KEY", "forge-insecure-not-used-for-anything")

DEBUG = os.getenv("DEBUG", "").lower() in ("true", "1")

# Application definition

INSTALLED_APPS = [
    "forge.main",
    "forge.utils",
]

DATABASES = {}

USE_TZ = True

# Analysis defaults; every command flag overrides the matching setting.

FORGE_DEFAULT_CAP = int(os.getenv("FORGE_DEFAULT_CAP", 6))
FORGE_DEFAULT_SEED = int(os.getenv("FORGE_DEFAULT_SEED", 0))
FORGE_CHARACTER_DRAWS = int(os.getenv("FORGE_CHARACTER_DRAWS", 5))
FORGE_GENERIC_SAMPLES = int(os.getenv("FORGE_GENERIC_SAMPLES", 3))
FORGE_BRIDGE_OFFSETS = tuple(
    int(offset)
    for offset in os.getenv("FORGE_BRIDGE_OFFSETS", "-1,0,1,2").split(",")
    if offset.strip()
)

LINT_PATHS = tuple(
    f"{BASE_DIR}/{path}" for path in ("algebra", "main", "utils", "tests")
)

# Logging goes to standard error as mozlog JSON; reports own standard output.

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMATTER = (
    "forge.main.logging.PrettyMozLogFormatter"
    if os.getenv("LOG_PRETTY", "").lower() in ("true", "1")
    else "forge.main.logging.MozLogFormatter"
)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "mozlog": {"()": LOG_FORMATTER, "mozlog_logger": "forge"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "mozlog",
            "stream": "ext://sys.stderr",
        },
        "null": {"class": "logging.NullHandler"},
    },
    "loggers": {
        "forge": {"level": LOG_LEVEL, "handlers": ["console"]},
    },
    "root": {"handlers": ["null"]},
}
