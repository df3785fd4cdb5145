"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class BracketError(ValueError):
    """A root-finding bracket does not contain a sign change."""


class UnsupportedError(ValueError):
    """The requested quantity is not defined for these parameters."""


class ConvergenceError(RuntimeError):
    """An iterative procedure could not produce a usable result."""


class TruncationWarning(RuntimeWarning):
    """A series hit its term cap before meeting the tolerance."""


class AccuracyWarning(RuntimeWarning):
    """Adaptive quadrature exhausted its budget before meeting the tolerance."""
