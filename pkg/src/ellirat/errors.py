"""Exception types raised across the package."""


class EllipratError(Exception):
    """Base class for every error raised by ellirat."""


class OriginNotInterior(EllipratError):
    pass


class Unbounded(EllipratError):
    pass


class Infeasible(EllipratError):
    pass


class DimensionTooLarge(EllipratError):
    pass


class ZeroDirection(EllipratError):
    pass


class DegenerateBody(EllipratError):
    """Raised when an operation needs a full-dimensional body."""


class EmptyInterior(EllipratError):
    pass


class NotSymmetric(EllipratError):
    pass


class NoConvergence(EllipratError):
    """Solver hit its iteration cap. ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class TooFewContacts(EllipratError):
    pass


class LevelEmpty(EllipratError):
    pass


class TailNotConverged(EllipratError):
    pass


class AllLevelsDegenerate(EllipratError):
    pass


class KinkPoint(EllipratError):
    pass


class SpecParseError(EllipratError):
    """Malformed function or polytope spec. ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
