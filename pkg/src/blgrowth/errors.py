"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class ResourceError(RuntimeError):
    """Raised when a requested computation exceeds the configured budget."""

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion


class SelectionFailedError(RuntimeError):
    """Raised when the greedy basis search cannot certify a positive margin."""
