"""
Core Django Application

Shared error hierarchy, seed handling and result file helpers used by every
simulator app.
"""
