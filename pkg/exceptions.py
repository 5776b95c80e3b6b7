"""Exception classes for the sticky-disc analysis toolkit."""


class StickyDiscsError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidInputError(StickyDiscsError):
    """Raised when a configuration, polygon or document cannot be used."""


class OverlapError(InvalidInputError):
    """Raised when two particles are closer than the contact distance."""

    def __init__(self, i: int, j: int, distance: float, epsilon: float):
        super().__init__(
            f"particles {i} and {j} overlap: distance {distance!r} < epsilon {epsilon!r} (infinite energy)"
        )
        self.pair = (i, j)
        self.distance = distance


class ConsistencyError(StickyDiscsError):
    """Raised when an internal invariant fails; always a bug signal."""


class IdentityResidualError(ConsistencyError):
    """Raised when an energy identity does not balance exactly."""


class OracleMismatchError(ConsistencyError):
    """Raised when the raster face oracle disagrees with the face enumeration."""


class BoundViolationError(ConsistencyError):
    """Raised when a sweep row falls outside its asserted bounds."""
