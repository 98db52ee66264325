"""Exception hierarchy for the exporter."""


class ExportError(Exception):
    """Base class for everything this tool raises on purpose."""


class ListingError(ExportError, ValueError):
    """Vocabulary listing file is missing or malformed."""


class BackendError(ExportError):
    """Embedding backend cannot be constructed or misbehaves."""
