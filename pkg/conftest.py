import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'otsbench.settings')
django.setup()
