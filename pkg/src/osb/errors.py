"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain of the operation."""


class FormatError(ValueError):
    """A matrix, family, or corpus file does not match its schema."""


class ResourceError(RuntimeError):
    """Exact enumeration was requested for a family above the size cap."""


class HypothesisError(RuntimeError):
    """A map family fails the uniform-marginal hypothesis required by a check."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
