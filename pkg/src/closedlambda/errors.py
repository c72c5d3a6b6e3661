"""Exception hierarchy shared by all closedlambda modules."""


class ClosedLambdaError(Exception):
    """Base class for every error raised by this package."""


class DegenerateDenominatorError(ClosedLambdaError, ZeroDivisionError):
    """The weak-probe denominator Gamma_ab*Gamma_cb + |Omega_2|^2 vanishes."""


class ResonantDenominatorError(ClosedLambdaError, ZeroDivisionError):
    """The closed-form propagator hit i*delta_k + alpha ~ 0; use the ODE path."""


class SingularLiouvillianError(ClosedLambdaError, ArithmeticError):
    """The Liouvillian does not have a one-dimensional null space."""


class InsufficientDataError(ClosedLambdaError, ValueError):
    """Too few samples (or too short a span) for a sinusoid fit."""


class ValidationError(ClosedLambdaError, ValueError):
    """A parameter violates its domain invariant.

    ``field`` names the offending parameter.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigError(ClosedLambdaError, ValueError):
    """Malformed configuration document; ``line`` is 1-based or None."""

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
