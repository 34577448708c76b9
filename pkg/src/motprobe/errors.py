"""Exception hierarchy. Each family maps onto one CLI exit status."""


class MotProbeError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(MotProbeError):
    """Configuration document could not be parsed."""

    exit_code = 2
    kind = "config"


class ValidationError(MotProbeError, ValueError):
    """A value violates a documented invariant."""

    exit_code = 3
    kind = "validation"


class InvalidGeometryError(ValidationError):
    pass


class InvalidRateError(ValidationError):
    pass


class InvalidScheduleError(ValidationError):
    pass


class NumericalError(MotProbeError, ArithmeticError):
    exit_code = 4
    kind = "numerical"


class ConvergenceError(NumericalError):
    pass


class DegenerateDataError(NumericalError):
    pass


class InvalidDataError(NumericalError):
    pass


class EmptySegmentError(NumericalError):
    pass


class OutputError(MotProbeError, OSError):
    exit_code = 5
    kind = "io"
