"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input is outside the physically meaningful domain of an operation."""


class GridError(ValueError):
    """A frequency or time grid is too coarse or too narrow for the request.

    The message always states the offending value and the required one.
    """


class ToleranceError(RuntimeError):
    """A numerical routine could not reach its requested tolerance.

    Carries the tolerance that was actually achieved in ``achieved``.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class SamplingError(ValueError):
    """The Monte Carlo sampler was handed an unusable target density."""


class FitError(ValueError):
    """A goodness-of-fit comparison has too little usable data."""


class ConfigError(ValueError):
    """A run configuration is malformed; the message names the offending key."""
