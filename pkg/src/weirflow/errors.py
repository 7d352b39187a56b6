"""Exception hierarchy shared by every weirflow module."""


class WeirflowError(Exception):
    """Base class for all library errors."""


class SchemaError(WeirflowError, ValueError):
    """CSV header does not match the expected column layout."""


class ParseError(WeirflowError, ValueError):
    """A cell could not be parsed as a number."""


class ValidationError(WeirflowError, ValueError):
    """A record violates a physical or sanity invariant."""


class ArgumentError(WeirflowError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(WeirflowError, ValueError):
    """A numeric input lies outside the domain of a formula or metric."""


class ShapeError(WeirflowError, ValueError):
    """Array shapes are incompatible."""


class TrainingError(WeirflowError, RuntimeError):
    """Network training diverged.

    Attributes:
        epoch: zero-based epoch index at which a non-finite loss appeared.
    """

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class ConvergenceError(WeirflowError, RuntimeError):
    """An iterative solver hit its iteration cap."""
