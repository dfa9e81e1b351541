class GuardError(RuntimeError):
    """A cost guard (alphabet, block length, dimension) was exceeded."""
