"""
Development settings for the sketching simulator project.

These settings keep debugging on and log every iteration detail.
"""

from .base import *
from decouple import config

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = True

ALLOWED_HOSTS = [
    'localhost',
    '127.0.0.1',
    'testserver',  # For Django testing framework
]

SIMULATOR_LOG_LEVEL = config('SIMULATOR_LOG_LEVEL', default='DEBUG')
LOGGING['loggers']['apps']['level'] = SIMULATOR_LOG_LEVEL
