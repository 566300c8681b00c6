"""
Production settings for the sketching simulator project.

Long experiment batches: no DEBUG, quieter console, full detail kept in the log file.
"""

from .base import *
from decouple import config

DEBUG = False

SECRET_KEY = config('SECRET_KEY')

SIMULATOR_LOG_LEVEL = config('SIMULATOR_LOG_LEVEL', default='INFO')
LOGGING['handlers']['console']['level'] = 'WARNING'
LOGGING['loggers']['apps']['level'] = SIMULATOR_LOG_LEVEL
