class ValidationError(ValueError):
    """Raised when an input file, value, or configuration violates a contract.

    The CLI maps this to exit code 2; everything else that escapes maps to 3.
    """
