"""Shared exception types."""


class NumericError(ArithmeticError):
    """Raised when a numeric-domain contract is violated (non-finite inputs,
    failed factorizations, degenerate weights).  The CLI maps this to exit
    code 1."""
