"""
Simulator error hierarchy.

Every error raised by the simulator apps derives from ``SimulatorError``.
Concrete classes also derive from the closest builtin so that plain
``except ValueError`` callers keep working.
"""


class SimulatorError(Exception):
    """Base class for all simulator errors"""


class PartitionError(SimulatorError, ValueError):
    """Row partitioning is impossible for the requested block count"""


class RankDeficiencyError(SimulatorError, ArithmeticError):
    """Matrix is numerically rank deficient"""

    def __init__(self, message: str, smallest: float = 0.0, largest: float = 0.0):
        super().__init__(message)
        self.smallest = smallest
        self.largest = largest


class DistributionError(SimulatorError, ValueError):
    """Probability vector is invalid for the requested operation"""


class SketchDimensionError(SimulatorError, ValueError):
    """Sketch is too small to embed the column space"""


class ReplicationError(SimulatorError, ValueError):
    """Replication counts cannot be produced or are inconsistent"""


class RuntimeModelError(SimulatorError, ValueError):
    """Runtime model specification or trace is invalid"""


class EmptyRoundError(SimulatorError, ArithmeticError):
    """No server responded in a round"""


class ConfigurationError(SimulatorError, ValueError):
    """Experiment configuration is inconsistent"""
