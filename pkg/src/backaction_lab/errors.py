"""Exception hierarchy shared by all modules."""


class BackActionError(Exception):
    """Base class for every error raised by this package."""


class NotHermitianError(BackActionError, ValueError):
    pass


class NoConvergenceError(BackActionError, ArithmeticError):
    pass


class DimensionOverflowError(BackActionError, ValueError):
    pass


class AmplitudeVanishesError(BackActionError, ArithmeticError):
    """The post-selected amplitude is too small for its phase to be defined."""

    def __init__(self, message, phi=None, magnitude=None):
        super().__init__(message)
        self.phi = phi
        self.magnitude = magnitude


class GridTooNarrowError(BackActionError, ValueError):
    pass


class AliasingDetectedError(BackActionError, ValueError):
    pass


class NonPositiveUncertaintyError(BackActionError, ValueError):
    pass


class EmptyDistributionError(BackActionError, ValueError):
    pass


class DivergentW0Error(BackActionError, ZeroDivisionError):
    pass


class ConfigError(BackActionError, ValueError):
    pass
