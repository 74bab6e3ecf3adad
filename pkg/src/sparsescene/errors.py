"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Raised when an argument violates an operation's contract.

    The CLI maps this to exit code 2 (usage error); everything else that
    escapes is a runtime failure (exit 1).
    """
