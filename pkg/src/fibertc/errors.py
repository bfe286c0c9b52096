"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`FibertcError`
so callers (the CLI in particular) can separate library failures from bugs.
"""


class FibertcError(Exception):
    pass


class DomainError(FibertcError, ValueError):
    """A point does not belong to the space it was given to."""


class ConfigurationError(FibertcError, ValueError):
    pass


class ParameterError(FibertcError, ValueError):
    """Path parameter outside [0, 1]."""


class GlueError(FibertcError, ValueError):
    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap


class AmbiguityError(FibertcError, ValueError):
    """Minimizing geodesic is not unique and no orientation hint was given."""


class PathContractError(FibertcError, ValueError):
    pass


class CoverageGapError(FibertcError, LookupError):
    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class PartitionViolationError(FibertcError, LookupError):
    def __init__(self, message, pair, pieces):
        super().__init__(message)
        self.pair = pair
        self.pieces = pieces


class NotAnIsomorphismError(FibertcError, ValueError):
    pass


class InvalidHomotopyError(FibertcError, ValueError):
    pass


class DominationError(FibertcError, ValueError):
    pass


class CoverError(FibertcError, ValueError):
    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class ModeError(FibertcError, ValueError):
    pass


class PreconditionError(FibertcError, ValueError):
    pass


class SamplingExhaustedError(FibertcError, RuntimeError):
    pass


class UnsupportedError(FibertcError, ValueError):
    pass


class MembershipError(FibertcError, ValueError):
    pass
