from django.apps import AppConfig


class SimAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "sim"
