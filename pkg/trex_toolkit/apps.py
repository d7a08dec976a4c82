from django.apps import AppConfig


class TrexToolkitConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'trex_toolkit'
