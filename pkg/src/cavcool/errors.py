"""Exception hierarchy.

Errors fall into three families that the CLI maps onto exit codes:
configuration problems (2), physics/validation problems (3) and numerical
failures (4).
"""


class CavcoolError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CavcoolError):
    pass


class ValidationError(CavcoolError, ValueError):
    pass


class NumericalError(CavcoolError, ArithmeticError):
    pass


class DimensionOverflowError(ValidationError):
    pass


class InvalidDimensionError(ValidationError):
    pass


class LayoutMismatchError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class DegenerateDriveError(ValidationError):
    pass


class EscapeOrbitError(ValidationError):
    """Energy exceeds the cubic barrier: the orbit is no longer confined."""


class HotStartError(ValidationError):
    """The leading-order cycle map would overshoot; pre-cool first."""


class NoFloorError(ValidationError):
    pass


class SingularSystemError(NumericalError):
    pass


class IntegrationError(NumericalError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step
