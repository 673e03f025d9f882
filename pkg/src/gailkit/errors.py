"""Exception types shared across the package."""


class InvalidMeasureError(ValueError):
    """An occupancy measure or policy table violates its invariants."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    ``residual`` holds the last measured error and ``history`` whatever
    trace the solver kept (may be empty).
    """

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = history if history is not None else []
