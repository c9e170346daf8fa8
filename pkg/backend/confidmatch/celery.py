import os

from django.apps import apps

from celery import Celery
from decouple import config


os.environ.setdefault(
    "DJANGO_SETTINGS_MODULE",
    config("DJANGO_SETTINGS_MODULE", default="confidmatch.settings.local"),
)

app = Celery("confidmatch_tasks")
app.config_from_object("django.conf:settings", namespace="CELERY")
app.autodiscover_tasks(lambda: [n.name for n in apps.get_app_configs()])
