"""
Experiment configuration, pipelines and the simulator management commands
(scores, design, solve, compare, verify).
"""
