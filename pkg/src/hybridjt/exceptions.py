"""Exception types raised across the package."""


class BifSyntaxError(ValueError):
    """Malformed BIF text. Carries the 1-based line and column of the offending token."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NetworkError(ValueError):
    """A Bayesian network violates one of its structural or numeric invariants."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class CycleError(NetworkError):
    pass


class ScopeError(ValueError):
    """Table scopes are incompatible for the requested operation."""


class ZeroProbabilityEvidence(ArithmeticError):
    """The evidence has probability zero under the network, so posteriors are undefined."""


class InconsistentDivision(ArithmeticError):
    """A positive value was divided by zero during propagation.

    Valid Hugin propagation never produces this; seeing it means the separator
    and clique tables went out of sync.
    """
