"""Exception types shared across the package.

The CLI maps ``ArgumentError`` (and its subclasses) to exit code 2 and
``CapacityError`` / ``BudgetExceeded`` to exit code 3.
"""


class ArgumentError(ValueError):
    """Invalid or infeasible arguments."""


class ParseError(ArgumentError):
    """Malformed edge-list or sample-set text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionError(ArgumentError):
    """Two objects disagree on the number of vertices."""


class HypothesisViolation(ArgumentError):
    """Parameters fall outside a theorem's stated hypotheses."""


class CapacityError(RuntimeError):
    """A problem exceeds the configured enumeration cap."""


class BudgetExceeded(RuntimeError):
    """An exact search ran out of its node budget."""
