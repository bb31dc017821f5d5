"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the model or operation."""


class ResourceError(RuntimeError):
    """A requested computation would exceed the configured size limits."""
