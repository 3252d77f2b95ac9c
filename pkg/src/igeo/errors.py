"""Exception hierarchy shared by all igeo modules."""


class IGeoError(Exception):
    """Base class for every error raised by igeo."""


class DomainError(IGeoError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidAlpha(DomainError):
    pass


class NotProbability(DomainError):
    """A measure or chart vector that must live on M does not."""


class ShapeError(IGeoError, ValueError):
    """Mismatched lengths or mixed sample spaces."""


class NumericsError(IGeoError, ArithmeticError):
    """An iterative solver failed to converge."""


class MissingDerivative(IGeoError):
    pass


class SingularGram(DomainError):
    pass


class DependentGenerators(DomainError):
    pass


class SingularMetric(NumericsError):
    pass


class OutOfDomain(IGeoError):
    """A trajectory left the parameter box. ``trace`` holds the partial result."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
