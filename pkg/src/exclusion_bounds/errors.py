class ExclusionBoundsError(Exception):
    """Base class for all package errors."""


class DimensionError(ExclusionBoundsError, ValueError):
    pass


class InvalidStateError(ExclusionBoundsError, ValueError):
    pass


class OrthonormalityError(ExclusionBoundsError, ValueError):
    pass


class SchemaError(ExclusionBoundsError, ValueError):
    """Malformed ensemble or state document.

    ``location`` names the offending field path (e.g. ``bases[1].vectors[0][2]``).
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class InapplicableBoundError(ExclusionBoundsError, ValueError):
    pass


class UnknownBoundError(ExclusionBoundsError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown bound"
