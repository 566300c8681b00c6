"""
Sketching Django App Configuration
"""
from django.apps import AppConfig


class SketchingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.sketching'
    verbose_name = 'Block Sketching'
