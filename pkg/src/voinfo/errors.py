"""Exception hierarchy shared by all modules."""


class VoIError(Exception):
    """Base class for every error raised by this package."""


class EmptyInput(VoIError, ValueError):
    pass


class DimensionMismatch(VoIError, ValueError):
    pass


class NotMember(VoIError, ValueError):
    """An action does not belong to the convex hull of the action set."""


class EmptyPolytope(VoIError, ValueError):
    pass


class InvalidInput(VoIError, ValueError):
    pass


class ParseError(VoIError, ValueError):
    """A problem file could not be parsed.

    ``location`` carries a line number or JSON field path when known.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class ValidationError(VoIError, ValueError):
    """Aggregates one or more invariant failures."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NotUndecided(VoIError, ValueError):
    pass


class NotFlexible(VoIError, ValueError):
    pass


class BoundaryPrior(VoIError, ValueError):
    pass


class DomainError(VoIError, ValueError):
    pass


class NegativeIndemnity(DomainError):
    pass


class ConvergenceFailure(VoIError, RuntimeError):
    pass


class ThetaTooLarge(VoIError, ValueError):
    pass


class QuadratureResidual(VoIError, RuntimeError):
    pass


class DegenerateGrid(VoIError, ValueError):
    pass
