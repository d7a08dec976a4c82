from django.apps import AppConfig


class TrexConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'trex'
