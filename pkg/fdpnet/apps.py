from django.apps import AppConfig


class FdpnetConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'fdpnet'
