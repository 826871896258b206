"""Exception taxonomy shared across the package.

Runner exit codes: usage/argument -> 2, resource -> 3, numeric -> 4.
"""


class ArgumentError(ValueError):
    """Malformed or out-of-contract argument."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(RuntimeError):
    """Configured memory/dimension budget exceeded."""


class NumericError(RuntimeError):
    """Numerical failure: non-convergence, self-check failure, NaN/Inf."""


class ConstraintError(ValueError):
    """A construction's verified post-condition cannot be met."""
