"""Exception types shared across the package."""


class SeglabError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(SeglabError):
    """The input file header does not provide the mandatory columns."""


class ValidationError(SeglabError):
    """A request or parameter violates a documented precondition.

    ``field`` optionally names the offending input field so callers can
    surface field-level messages.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class NotFoundError(SeglabError):
    """A referenced entity (dataset, version, customer) does not exist."""


class UndefinedMetricError(SeglabError):
    """The requested quantity is undefined for this model shape.

    Raised by the silhouette score on fewer than two clusters, by
    explanations on single-cluster models and by version comparison on
    disjoint customer sets.
    """


class SourceHashMismatchError(SeglabError):
    """The registered dataset content no longer matches a stored version."""


class StorageError(SeglabError):
    """A workspace write failed; the operation may be retried."""

    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable
