"""Exception hierarchy shared by all modules."""


class MLShadeError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(MLShadeError, ValueError):
    """Shapes or values that violate an operation's preconditions."""


class EvaluationError(MLShadeError, ArithmeticError):
    """An objective returned something other than a finite real."""


class ParseError(MLShadeError, ValueError):
    """Malformed data file. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MLShadeError, ValueError):
    """Parsed data that fails a structural check (e.g. non-orthonormal rotation)."""


class DegenerateInputError(MLShadeError, ValueError):
    """Too few points or donors for the requested operation."""


class NumericalError(MLShadeError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class ConfigError(MLShadeError, ValueError):
    """Invalid run or experiment configuration."""
