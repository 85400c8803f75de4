"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when arguments or input data violate an operation's preconditions."""


class BudgetExceeded(InputError):
    """Raised by the enumeration oracles when C(n, k) exceeds the configured budget."""
