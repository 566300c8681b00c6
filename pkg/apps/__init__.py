"""
Django apps of the coded sketching simulator.
"""
