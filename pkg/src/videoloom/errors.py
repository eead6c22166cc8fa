"""Exception types shared across the engine and the service layer."""


class ValidationError(ValueError):
    """Input violates a documented contract.

    ``path`` names the offending field (dotted, with [i] for list items)
    so callers such as the HTTP layer and the CLI can surface it.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(message if path is None else f"{path}: {message}")


class CentroidUndefinedError(ValidationError):
    """Centroid requested on an image with no foreground mass."""


class CapacityError(Exception):
    """A server cap was exceeded; ``cap`` names the limit that fired."""

    def __init__(self, cap: str, limit, requested):
        self.cap = cap
        self.limit = limit
        self.requested = requested
        super().__init__(f"cap {cap} exceeded: limit {limit}, requested {requested}")


class ConflictError(Exception):
    """Optimistic-concurrency failure: expected revision is stale."""


class BusyError(Exception):
    """A generation is already running for this session."""


class SchemaError(ValueError):
    """Persisted session data cannot be decoded.

    Carries the location of the first invalid field.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(message if path is None else f"{path}: {message}")
