import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'trex_toolkit.settings')
django.setup()
