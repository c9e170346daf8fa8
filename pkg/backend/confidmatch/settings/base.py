import os

from decouple import config


BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def base_dir_join(*args):
    return os.path.join(BASE_DIR, *args)


DEBUG = config("DEBUG", default=False, cast=bool)

SECRET_KEY = config("SECRET_KEY", default="confidmatch-cli")  # nosec

# No database: every artifact of a run is a file under SEMISUP_OUTPUT_ROOT.
DATABASES = {}

PRE_INSTALLED_APPS = [
    "django_guid",
]

LOCAL_APPS = [
    "apps.common",
    "apps.semisup",
]

INSTALLED_APPS = PRE_INSTALLED_APPS + LOCAL_APPS

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# Semi-supervised runs
SEMISUP_OUTPUT_ROOT = config("SEMISUP_OUTPUT_ROOT", default=base_dir_join("runs"))
SEMISUP_SWEEP_JOBS = config("SEMISUP_SWEEP_JOBS", default=1, cast=int)
SEMISUP_LOG_LEVEL = config("SEMISUP_LOG_LEVEL", default="INFO")

# Celery
# Sweep cells go through the broker only when one is configured and tasks are not eager.
CELERY_BROKER_URL = config("CELERY_BROKER_URL", default="")
CELERY_RESULT_BACKEND = config("CELERY_RESULT_BACKEND", default="")
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TASK_ACKS_LATE = True
CELERY_TIMEZONE = TIME_ZONE
CELERY_TASK_ALWAYS_EAGER = config("CELERY_TASK_ALWAYS_EAGER", default=False, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_WORKER_PREFETCH_MULTIPLIER = config("CELERY_WORKER_PREFETCH_MULTIPLIER", cast=int, default=1)
CELERY_WORKER_CONCURRENCY = config(
    "CELERY_WORKER_CONCURRENCY", cast=lambda v: int(v) if v else None, default=None
)
CELERY_WORKER_MAX_TASKS_PER_CHILD = config(
    "CELERY_WORKER_MAX_TASKS_PER_CHILD", cast=int, default=50
)
SEMISUP_SWEEP_RESULT_TIMEOUT = config("SEMISUP_SWEEP_RESULT_TIMEOUT", cast=float, default=3600.0)

# Sentry
SENTRY_DSN = config("SENTRY_DSN", default="")
COMMIT_SHA = config("RENDER_GIT_COMMIT", default="")

DJANGO_GUID = {
    "GUID_HEADER_NAME": "Correlation-ID",
    "VALIDATE_GUID": False,
    "UUID_LENGTH": 32,
}

# Ensure logs directory exists
LOGS_DIR = base_dir_join("logs")
os.makedirs(LOGS_DIR, exist_ok=True)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "filters": {
        "correlation_id": {"()": "django_guid.log_filters.CorrelationId"},
    },
    "formatters": {
        "standard": {
            "format": "%(levelname)-8s [%(asctime)s] [%(correlation_id)s] %(name)s: %(message)s"
        },
    },
    "handlers": {
        "console": {
            "level": SEMISUP_LOG_LEVEL,
            "class": "logging.StreamHandler",
            "formatter": "standard",
            "filters": ["correlation_id"],
        },
        "semisup_file": {
            "level": "INFO",
            "class": "logging.handlers.RotatingFileHandler",
            "filename": os.path.join(LOGS_DIR, "semisup.log"),
            "maxBytes": 10 * 1024 * 1024,  # 10MB
            "backupCount": 5,
            "formatter": "standard",
            "filters": ["correlation_id"],
        },
    },
    "loggers": {
        "": {
            "handlers": ["console", "semisup_file"],
            "level": "INFO",
        },
        "celery": {
            "handlers": ["console", "semisup_file"],
            "level": "INFO",
        },
        "django_guid": {
            "handlers": ["console", "semisup_file"],
            "level": "WARNING",
            "propagate": False,
        },
        "semisup": {
            "handlers": ["console", "semisup_file"],
            "level": "DEBUG" if DEBUG else "INFO",
            "propagate": False,
        },
    },
}
