"""
Verification Django App Configuration
"""
from django.apps import AppConfig


class VerifyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.verify'
    verbose_name = 'Property Verification'
