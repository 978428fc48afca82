"""Exception types shared across the package."""


class UnsupportedConfigurationError(ValueError):
    """A requested configuration cannot be served by the selected architecture
    or algorithm (e.g. equal sub-arrays with a chain count that does not divide
    the antenna count, or a heavy search cell without the heavy flag)."""


class NumericalBreakdownError(ArithmeticError):
    """A linear-algebra step that is well posed in exact arithmetic failed
    numerically (non-positive-definite factorization, impossible update)."""
