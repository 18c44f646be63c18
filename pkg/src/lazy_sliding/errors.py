"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A schedule or solver configuration is missing/violating a required constant."""


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge.

    Carries the last residual in ``residual`` when applicable.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BudgetExceeded(RuntimeError):
    """An inner solver exhausted its iteration cap before certifying.

    Carries the best iterate found so far and the last threshold value so the
    caller can inspect how close the run got.
    """

    def __init__(self, message, best_point=None, last_phi=None, iterations=None):
        super().__init__(message)
        self.best_point = best_point
        self.last_phi = last_phi
        self.iterations = iterations
