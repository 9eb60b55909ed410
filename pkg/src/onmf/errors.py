"""Exception types shared across the toolkit.

All of these derive from ValueError so callers that do not care about the
distinction can catch one thing.  The CLI maps them to stable exit codes
(see onmf.cli).
"""


class ShapeError(ValueError):
    """Matrix or array dimensions do not conform."""


class DegenerateDictionaryError(ValueError):
    """Dictionary has no usable (nonzero) column."""


class InvalidAggregateError(ValueError):
    """Aggregate matrix violates its structural requirements (e.g. asymmetric)."""


class InvalidRankError(ValueError):
    """Requested factorization rank is not admissible for the data."""


class InsufficientDataError(ValueError):
    """Not enough samples to run the requested pipeline."""


class CoverageError(ValueError):
    """Patch or label layout leaves part of the target uncovered."""


class ParseError(ValueError):
    """Malformed input file.

    Carries the 1-based line number of the offending record when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(ValueError):
    """Binary or structured file does not match its documented format."""
