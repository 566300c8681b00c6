"""
Simulator Django Configuration Package

This package contains all Django settings configurations for different environments.
"""
