"""Exception hierarchy. The CLI maps these onto exit codes."""


class PhasekitError(Exception):
    """Base class for all phasekit errors."""


class ValidationError(PhasekitError, ValueError):
    """Bad argument or violated precondition."""


class DimensionError(ValidationError):
    """Fock index or state dimension does not fit the requested space."""


class TruncationError(ValidationError):
    """Truncated basis does not capture enough of a state's probability."""

    def __init__(self, message, captured=None):
        super().__init__(message)
        self.captured = captured


class StateSpecError(ValidationError):
    """Malformed state-spec string; ``position`` is the offending offset."""

    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class IntegrationError(PhasekitError, ArithmeticError):
    """Non-finite integrand value at a quadrature node."""


class ConvergenceError(PhasekitError, ArithmeticError):
    """A numerical construction did not reach its accuracy target."""


class PhasekitWarning(UserWarning):
    """Numerically questionable but usable configuration."""
