"""Typed errors raised by the simulation library."""


class FahvsimError(Exception):
    """Base class for all library errors."""


class EnvelopeViolation(FahvsimError):
    """State left the declared flight envelope of the aero model."""


class SingularControlGain(FahvsimError):
    """A control-channel gain g_i fell below the configured floor."""


class ArcsinDomain(FahvsimError):
    """Flight-path-angle reconstruction got |chi_h / V| >= 1 (observer divergence)."""


class DimensionMismatch(FahvsimError):
    """Vector argument has the wrong length for the given centers/box."""


class ParameterDomain(FahvsimError):
    """A scalar parameter violates its required open/closed interval."""


class BoundBreach(FahvsimError):
    """Transformed tracking error reached the performance envelope boundary.

    Raised only in strict mode; the default policy records the event,
    clamps the normalized error and continues.
    """

    def __init__(self, message, t=None, channel=None, log=None):
        super().__init__(message)
        self.t = t
        self.channel = channel
        self.log = log


class Divergence(FahvsimError):
    """A controller diagnostic exceeded the divergence ceiling."""

    def __init__(self, message, t=None, log=None):
        super().__init__(message)
        self.t = t
        self.log = log


class NonFiniteDerivative(FahvsimError):
    """An integrator stage produced NaN/Inf; carries the offending component."""

    def __init__(self, message, component=None, t=None, log=None):
        super().__init__(message)
        self.component = component
        self.t = t
        self.log = log


class EmptyLog(FahvsimError):
    """Metrics were requested from a trajectory log with no rows."""


class ParseError(FahvsimError):
    """Scenario file could not be parsed; carries location information."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ValidationError(FahvsimError):
    """A configuration value violates its declared constraint."""

    def __init__(self, message, key=None, constraint=None):
        super().__init__(message)
        self.key = key
        self.constraint = constraint
