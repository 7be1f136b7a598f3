"""Exception hierarchy shared by every module of the package."""


class MsmError(Exception):
    """Base class for errors raised by msmscaling."""


class DomainError(MsmError, ValueError):
    """A parameter or input lies outside its admissible domain."""


class DegenerateInputError(MsmError, ValueError):
    """The input is well-formed but carries no usable information
    (zero variance, too few observations, identically zero series)."""


class ParseError(MsmError, ValueError):
    """A CSV file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
