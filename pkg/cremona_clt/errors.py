"""Exception types raised by the algebra, walk and statistics layers.

The CLI maps them to exit statuses in ``services.experiment_service``.
"""


class CremonaError(Exception):
    """Base class for every error raised by this package."""


class DegreeMismatchError(CremonaError, ValueError):
    """Homogeneous polynomials of different degrees were combined."""


class NonExactDivisionError(CremonaError, ArithmeticError):
    """A division that was required to be exact left a remainder."""


class DegreeCapExceeded(CremonaError, RuntimeError):
    """A symbolic result would exceed the configured degree cap."""

    def __init__(self, degree, cap):
        super().__init__(f"result degree {degree} exceeds the degree cap {cap}")
        self.degree = degree
        self.cap = cap


class MapConstructionError(CremonaError, ValueError):
    """Input data does not describe a rational self-map of the plane."""


class SingularMatrixError(CremonaError, ValueError):
    pass


class FamilyError(CremonaError, ValueError):
    """Generator family parameters violate the family's hypotheses."""


class BackendError(CremonaError, ValueError):
    """Fast representations of different kinds were mixed, or a rule was applied unsoundly."""


class MeasureError(CremonaError, ValueError):
    pass


class LawError(CremonaError, ValueError):
    pass


class ParseError(CremonaError, ValueError):
    def __init__(self, message, text=None, position=None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.text = text
        self.position = position


class ConfigError(CremonaError, ValueError):
    """Experiment config is malformed; ``field`` names the offending path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
