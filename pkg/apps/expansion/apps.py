"""
Expansion network Django App Configuration
"""
from django.apps import AppConfig


class ExpansionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.expansion'
    verbose_name = 'Expansion Networks'
