"""
Solver Django App Configuration
"""
from django.apps import AppConfig


class SolverConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.solver'
    verbose_name = 'Coded Steepest Descent'
