"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class DimensionMismatchError(InvalidInputError):
    """Raised when paired vectors/matrices disagree in length or shape."""


class DegenerateSampleError(InvalidInputError):
    """Raised when a ranking quantity is requested for a sample whose
    label vector has no relevant or no irrelevant labels."""


class ParseError(ValueError):
    """Raised on malformed dataset or model files; carries a line number
    when one is known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergedError(RuntimeError):
    """Raised when an optimizer blows up; carries the trace collected so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
