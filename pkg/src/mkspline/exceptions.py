"""Exception types shared across the package."""


class MkSplineError(Exception):
    """Base class for all mkspline-specific errors."""


class DegenerateShiftsError(MkSplineError, ValueError):
    """Raised when basis shifts produce a singular cardinality system."""


class InvalidRegionError(MkSplineError, ValueError):
    """Raised when a fitting region is malformed or too short for a grid."""


class CannotRefineError(MkSplineError, RuntimeError):
    """Raised when a knot grid at unit spacing or below is refined again."""


class RankDeficiencyError(MkSplineError, ArithmeticError):
    """Raised when a least-squares normal matrix is not positive definite.

    Usually this signals too many knots for the number of channels in the
    fitted region.
    """


class SpectrumFormatError(MkSplineError, ValueError):
    """Raised on malformed spectrum CSV input.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedLineError(SpectrumFormatError):
    """A CSV line does not match the ``<integer>,<decimal>`` grammar."""


class NonContiguousChannelsError(SpectrumFormatError):
    """Channel numbers do not form a contiguous 0-based run."""


class NegativeCountError(SpectrumFormatError):
    """A count value is negative."""
