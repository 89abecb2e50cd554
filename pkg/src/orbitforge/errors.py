"""Exception types raised across the package."""


class OrbitForgeError(Exception):
    """Base class for all package errors."""


class BadParams(OrbitForgeError, ValueError):
    """Inconsistent or out-of-range parameters."""


class CollisionError(OrbitForgeError):
    """Evaluation at (or numerically at) a collision configuration."""

    def __init__(self, message, time=None, pair=None):
        super().__init__(message)
        self.time = time
        self.pair = pair


class GridError(OrbitForgeError, ValueError):
    pass


class OutOfRange(OrbitForgeError, ValueError):
    pass


class DimMismatch(OrbitForgeError, ValueError):
    pass


class CollisionFloor(OrbitForgeError):
    """A minimizer was dragged below the soft collision floor."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CloseApproach(OrbitForgeError):
    """Integration stopped on a close approach."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SchemaError(OrbitForgeError, ValueError):
    pass
