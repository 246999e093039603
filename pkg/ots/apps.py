from django.apps import AppConfig


class OtsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ots'
    verbose_name = 'Transmission switching'
