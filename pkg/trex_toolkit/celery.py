"""
Celery application for per-system work (see ``pipeline.tasks``).

Workers start with ``celery -A trex_toolkit worker -l info``; commands only
dispatch to them when TREX_EXECUTION_BACKEND is ``celery``.
"""
import os
import sys

from celery import Celery

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "trex_toolkit.settings")

app = Celery("trex_toolkit")

app.config_from_object("django.conf:settings", namespace="CELERY")

app.autodiscover_tasks()
