"""Exception types shared across the package."""


class KstError(Exception):
    """Base class; ``details`` carries a machine-readable payload."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class PreconditionError(KstError, ValueError):
    """An operation was called outside its stated hypotheses."""


class ShortfallError(KstError):
    """A constructive step fell short of its guaranteed count.

    At desk scale the asymptotic constants do not hold, so this is an
    expected outcome rather than a defect.
    """


class NotFoundError(KstError):
    """A search for a required substructure came back empty."""


class TilingError(KstError):
    """The constructive tiler could not complete a tiling."""
