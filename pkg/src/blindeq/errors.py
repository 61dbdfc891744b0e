"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class DegenerateSignalError(ValueError):
    """Raised when a signal's autocorrelation matrix is not positive definite."""


class MetricError(ValueError):
    """Raised when metrics are requested for a run that did not complete."""


class DivergenceError(FloatingPointError):
    """An adaptive update produced a non-finite tap weight.

    Attributes
    ----------
    iteration : int
        Index of the update (0-based) that produced the bad weights.
    algorithm : str or None
        Algorithm name, when known.
    """

    def __init__(self, iteration: int, algorithm: str | None = None):
        self.iteration = iteration
        self.algorithm = algorithm
        who = f"{algorithm} " if algorithm else ""
        super().__init__(f"{who}equalizer diverged at iteration {iteration}")
