"""
Straggler simulation Django App Configuration
"""
from django.apps import AppConfig


class StragglersConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.stragglers'
    verbose_name = 'Straggler Simulation'
