"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter values."""


class DomainError(ValueError):
    """A model was evaluated outside the domain where it is defined."""


class InfeasibleError(ValueError):
    """A platform cannot operate under the requested physical constraints."""


class EmptyRegionError(InfeasibleError):
    """The platform cannot reach its operating altitude, so it has no feasible region."""


class DegenerateCoverageWarning(UserWarning):
    """The path-loss threshold is exceeded even directly below the transmitter."""


class ExtrapolationWarning(UserWarning):
    """A calibrated model was evaluated outside its calibration range."""
