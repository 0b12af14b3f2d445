"""Exception hierarchy shared by the library and the command-line front end."""


class MuskatError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 3


class ShapeError(MuskatError, ValueError):
    """Array lengths or grids do not match."""

    exit_code = 2


class InvariantError(MuskatError, ValueError):
    """A stored field violates a structural invariant (reality, finiteness)."""

    exit_code = 3


class DomainError(MuskatError, ValueError):
    """A pointwise map was evaluated outside its domain (e.g. pinch-off)."""

    exit_code = 3


class ParameterError(MuskatError, ValueError):
    """A physical or numerical parameter is out of range."""

    exit_code = 2


class ValidationError(ParameterError):
    """Configuration or input data failed validation."""


class ConfigurationError(MuskatError, ValueError):
    """Objects were combined in an incompatible way."""

    exit_code = 2


class ConvergenceError(MuskatError, RuntimeError):
    """Picard iteration did not reach its tolerance."""

    def __init__(self, message, last_gap=float("nan"), iterations=0):
        super().__init__(message)
        self.last_gap = last_gap
        self.iterations = iterations


class BlowUpError(MuskatError, FloatingPointError):
    """A time step produced non-finite values."""

    def __init__(self, message, time=float("nan")):
        super().__init__(message)
        self.time = time


class StudyError(MuskatError, RuntimeError):
    """A run inside a parameter study failed."""

    def __init__(self, message, mu=float("nan")):
        super().__init__(message)
        self.mu = mu
