"""
Simulator Settings Package
"""
