"""
Django settings for the trex_toolkit project.

The project has no web surface: every operation is a management command
(see ``python manage.py help``). Settings hold the experiment defaults,
logging and the Celery wiring used for per-system parallel work.
"""

import os

SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'trex-toolkit-local-key')

DEBUG = os.environ.get('DJANGO_DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'trex_toolkit',
    'synthdata',
    'trex',
    'fdpnet',
    'pipeline',
]

LANGUAGE_CODE = "en-us"
TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging
TREX_LOG_LEVEL = os.environ.get('TREX_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'line': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'line',
        },
    },
    'loggers': {
        name: {
            'handlers': ['console'],
            'level': TREX_LOG_LEVEL,
            'propagate': False,
        }
        for name in ('trex_toolkit', 'synthdata', 'trex', 'fdpnet', 'pipeline')
    },
}


# Experiment defaults. Config files and command-line flags override these.
TREX_DEFAULTS = {
    # T-Rex calibration
    'K': 20,
    'L': None,  # None means L = p
    'T_max': 10,
    'v_grid': [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95],
    'alpha': None,  # required by evaluate/select, no default
    'deflation': 'linear',

    # Synthetic corpora (desk scale)
    'n': 15,
    'p': 30,
    's': 3,
    'snr_values': [0.3, 1.0, 3.0],
    'beta_magnitude_range': [1.0, 3.0],
    'count': 100,
    'families': None,  # None means the fourteen training families

    # FDP network
    'epochs': 10,
    'lr': 1e-3,
    'batch_size': 256,
    'loss_weight': 1.1,
    'hidden_dims': [128, 64, 32],
    'p_max': None,  # None means the largest p seen in the training set

    'threads': 1,
}

# 'local' runs task functions in-process; 'celery' dispatches to workers.
TREX_EXECUTION_BACKEND = os.environ.get('TREX_EXECUTION_BACKEND', 'local')


# Celery configuration
CELERY_BROKER_URL = os.environ.get('CELERY_BROKER_URL', 'redis://localhost:6379/0')
CELERY_RESULT_BACKEND = os.environ.get('CELERY_RESULT_BACKEND', 'redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = "UTC"

CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 30 * 60  # 30 minutes hard limit
CELERY_TASK_SOFT_TIME_LIMIT = 25 * 60  # 25 minutes soft limit
CELERY_RESULT_EXPIRES = 3600
CELERY_WORKER_PREFETCH_MULTIPLIER = 1
CELERY_TASK_ACKS_LATE = True
CELERY_WORKER_MAX_TASKS_PER_CHILD = 50
