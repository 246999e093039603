"""
Django settings for the otsbench project.

The project has no web surface: Django provides configuration, logging and the
management command framework that backs the ``ots`` command line. Every
experiment default can be overridden from the environment.
"""

from pathlib import Path

import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Only used by Django internals; nothing is signed or served.
SECRET_KEY = os.environ.get('OTS_APP_SECRET', 'otsbench-insecure-local-key')

OTS_LOG_LEVEL = os.environ.get('OTS_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'logfmt': {
            'format': 'ts=%(asctime)s level=%(levelname)s logger=%(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'logfmt',
        },
        'file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': os.environ.get('OTS_ERROR_LOG', 'error.log'),
            'formatter': 'logfmt',
            'delay': True,
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
            'level': 'ERROR',
            'propagate': True,
        },
        'core': {
            'handlers': ['console', 'file'],
            'level': OTS_LOG_LEVEL,
            'propagate': False,
        },
        'ots': {
            'handlers': ['console', 'file'],
            'level': OTS_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'ots',
]

MIDDLEWARE = []

ROOT_URLCONF = None

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Experiment defaults. They mirror the published protocol: 0.01 % gap, one hour,
# a single thread, 5 s per topological bounding problem, 10 s of heuristic.
OTS_DATA_DIR = Path(os.environ.get('OTS_DATA_DIR', BASE_DIR / 'core' / 'data'))
OTS_TIME_LIMIT = float(os.environ.get('OTS_TIME_LIMIT', '3600'))
OTS_REL_GAP = float(os.environ.get('OTS_REL_GAP', '1e-4'))
OTS_THREADS = int(os.environ.get('OTS_THREADS', '1'))
OTS_TBT_PROBLEM_LIMIT = float(os.environ.get('OTS_TBT_PROBLEM_LIMIT', '5'))
OTS_HEURISTIC_BUDGET = float(os.environ.get('OTS_HEURISTIC_BUDGET', '10'))
OTS_IMPROVEMENT_EPSILON = float(os.environ.get('OTS_IMPROVEMENT_EPSILON', '1e-6'))
OTS_DEMAND_SPREAD = float(os.environ.get('OTS_DEMAND_SPREAD', '0.1'))
OTS_ORACLE_MAX_LINES = int(os.environ.get('OTS_ORACLE_MAX_LINES', '20'))
OTS_SPLIT_FRACTION = float(os.environ.get('OTS_SPLIT_FRACTION', str(1 / 3)))
OTS_JOBS = int(os.environ.get('OTS_JOBS', '1'))
