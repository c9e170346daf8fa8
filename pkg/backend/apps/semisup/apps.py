from django.apps import AppConfig


class SemiSupConfig(AppConfig):
    name = "apps.semisup"
    label = "semisup"
    verbose_name = "Class-level confidence semi-supervised learning"
