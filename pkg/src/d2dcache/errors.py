"""Exception and warning types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter lies outside its documented domain."""


class InvalidRangeError(ValueError):
    """An index or interval is out of range."""


class UnsupportedExponentError(ValueError):
    """The exponent is outside the regime this formula covers."""


class NoSolutionError(ValueError):
    """The defining equation has no admissible solution."""


class GraphTooLargeError(RuntimeError):
    """The exact solver refused an instance above its size cutoff."""


class OutOfValidityError(ValueError):
    """Inputs violate the validity condition of a bound."""


class InvariantError(RuntimeError):
    """A per-trial invariant failed; indicates a bug, not bad input."""


class OutOfRegimeWarning(UserWarning):
    """A value was returned, but the inputs fall outside the guaranteed regime."""
